// SPDX-License-Identifier: Apache-2.0
//
// subnyquist: multipath delay estimation from low-rate filter-bank samples
// Copyright (C) 2026 The subnyquist authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SUBNYQUIST_DFT_HPP
#define SUBNYQUIST_DFT_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <vector>

// Row-wise DFT helpers on the uniform grid w_j = 2*pi*j/(N*T).
// Forward: X[j] = sum_n x[n] exp(-i 2 pi j n / N)   (the DTFT sampled on the grid)
// Inverse: x[n] = (1/N) sum_j X[j] exp(+i 2 pi j n / N)

namespace subnyquist::dft
{

using cplx = std::complex<double>;

inline Eigen::MatrixXcd forward_rows(const Eigen::MatrixXcd &x)
{
    const Eigen::Index n = x.cols();
    Eigen::MatrixXcd out(x.rows(), n);
    Eigen::FFT<double> fft;
    std::vector<cplx> in(static_cast<std::size_t>(n)), res;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < n; ++c)
            in[static_cast<std::size_t>(c)] = x(r, c);
        fft.fwd(res, in);
        for (Eigen::Index c = 0; c < n; ++c)
            out(r, c) = res[static_cast<std::size_t>(c)];
    }
    return out;
}

inline Eigen::MatrixXcd inverse_rows(const Eigen::MatrixXcd &x)
{
    const Eigen::Index n = x.cols();
    Eigen::MatrixXcd out(x.rows(), n);
    Eigen::FFT<double> fft;
    std::vector<cplx> in(static_cast<std::size_t>(n)), res;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < n; ++c)
            in[static_cast<std::size_t>(c)] = x(r, c);
        fft.inv(res, in); // includes the 1/N factor
        for (Eigen::Index c = 0; c < n; ++c)
            out(r, c) = res[static_cast<std::size_t>(c)];
    }
    return out;
}

} // namespace subnyquist::dft

#endif // SUBNYQUIST_DFT_HPP
