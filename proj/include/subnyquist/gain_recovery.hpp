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

#ifndef SUBNYQUIST_GAIN_RECOVERY_HPP
#define SUBNYQUIST_GAIN_RECOVERY_HPP

#include "subnyquist/dft.hpp"
#include "subnyquist/errors.hpp"
#include "subnyquist/frontend.hpp"
#include "subnyquist/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace subnyquist
{

struct RecoveredChannel
{
    DelaySet delays;
    GainSequences gains;
    std::optional<Eigen::MatrixXcd> channel_coeffs;
};

/// b[n] = pinv(N(tau)) d[n] for every n.
inline Eigen::MatrixXcd recover_b(const MeasurementSet &d, const DelaySet &tau, const BandConfig &cfg)
{
    if (d.p() != cfg.p)
        throw ConfigError("recover_b: channel count mismatch");
    if (static_cast<int>(tau.size()) > cfg.p)
        throw InsufficientChannelsError("recover_b: need p >= K");
    const Eigen::MatrixXcd n = vandermonde(tau, cfg).entries;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(n);
    if (qr.rank() < n.cols())
        throw DegenerateModelError("recover_b: steering matrix is rank deficient");
    return qr.solve(d.channels);
}

/// a(w) = D^{-1}(w, tau) b(w), applied per grid bin (cyclic convention).
inline GainSequences recover_a(const Eigen::MatrixXcd &b, const DelaySet &tau, const BandConfig &cfg)
{
    if (b.rows() != static_cast<Eigen::Index>(tau.size()))
        throw ConfigError("recover_a: one sequence per delay required");
    Eigen::MatrixXcd spec = dft::forward_rows(b);
    const double n = static_cast<double>(b.cols());
    for (Eigen::Index j = 0; j < spec.cols(); ++j)
    {
        const double w = two_pi * static_cast<double>(j) / (n * cfg.T);
        spec.col(j) = spec.col(j).cwiseProduct(delay_phases(w, tau).conjugate());
    }
    return dft::inverse_rows(spec);
}

/// alpha_k[n] = a_k[n] / s[n] for known pilot symbols s; the output has one column per symbol.
inline Eigen::MatrixXcd recover_channel_coeffs(const GainSequences &a, const Eigen::VectorXcd &symbols)
{
    if (symbols.size() > a.cols())
        throw ConfigError("recover_channel_coeffs: more symbols than gain samples");
    std::string zeros;
    for (Eigen::Index n = 0; n < symbols.size(); ++n)
        if (symbols(n) == cplx(0.0))
            zeros += (zeros.empty() ? "" : ",") + std::to_string(n);
    if (!zeros.empty())
        throw DomainError("recover_channel_coeffs: zero pilot symbol at index " + zeros);
    Eigen::MatrixXcd alpha(a.rows(), symbols.size());
    for (Eigen::Index n = 0; n < symbols.size(); ++n)
        alpha.col(n) = a.col(n) / symbols(n);
    return alpha;
}

/// Delays and gains from corrected measurements once the delays are known (or estimated).
inline RecoveredChannel recover_channel(const MeasurementSet &d, const DelaySet &tau, const BandConfig &cfg,
                                        const std::optional<Eigen::VectorXcd> &symbols = std::nullopt)
{
    RecoveredChannel out;
    out.delays = tau;
    out.gains = recover_a(recover_b(d, tau, cfg), tau, cfg);
    if (symbols)
        out.channel_coeffs = recover_channel_coeffs(out.gains, *symbols);
    return out;
}

} // namespace subnyquist

#endif // SUBNYQUIST_GAIN_RECOVERY_HPP
