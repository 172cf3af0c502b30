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

#ifndef SUBNYQUIST_DELAY_RECOVERY_HPP
#define SUBNYQUIST_DELAY_RECOVERY_HPP

#include "subnyquist/errors.hpp"
#include "subnyquist/frontend.hpp"
#include "subnyquist/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

// Delay recovery from corrected measurements d[n] = N(tau) b[n]:
//   correlation -> (optional) spatial smoothing -> signal subspace -> ESPRIT eigen-step.

namespace subnyquist
{

/// q x q Hermitian accumulation of measurement vectors.
struct CorrelationMatrix
{
    Eigen::MatrixXcd entries;
    Eigen::Index vectors = 0;
    bool smoothed = false;
    /// Optional square-root factor F with entries = F F^H; subspace steps use it to avoid squaring the conditioning.
    Eigen::MatrixXcd factor;

    Eigen::Index size() const { return entries.rows(); }
};

/// R_dd = sum_n d[n] d[n]^H.
inline CorrelationMatrix correlation(const MeasurementSet &d)
{
    if (d.length() < 1)
        throw ConfigError("correlation: need at least one measurement vector");
    CorrelationMatrix r;
    r.entries = d.channels * d.channels.adjoint();
    // Exact Hermitian symmetry for the downstream SVD.
    r.entries = (0.5 * (r.entries + r.entries.adjoint())).eval();
    r.vectors = d.length();
    r.factor = d.channels;
    return r;
}

namespace detail
{
/// Singular values of R, taken as squared singular values of the factor when one is attached.
inline Eigen::VectorXd correlation_spectrum(const CorrelationMatrix &r)
{
    if (r.factor.size() > 0)
        return Eigen::JacobiSVD<Eigen::MatrixXcd>(r.factor).singularValues().array().square();
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(r.entries).singularValues();
}
} // namespace detail

/// Number of singular values above rel_tol times the largest. A zero matrix has rank 0.
inline std::size_t effective_rank(const CorrelationMatrix &r, double rel_tol)
{
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw ConfigError("effective_rank: rel_tol must lie in (0,1)");
    const Eigen::VectorXd s = detail::correlation_spectrum(r);
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0))
            ++rank;
    return rank;
}

/// Forward spatial smoothing over the M = p-K sliding length-(K+1) sub-vectors.
/// Rank K is restored for any gain correlation once M >= K (p >= 2K).
inline CorrelationMatrix spatial_smooth(const MeasurementSet &d, std::size_t K)
{
    const Eigen::Index q = static_cast<Eigen::Index>(K) + 1;
    if (K < 1 || d.p() < q)
        throw InsufficientChannelsError("spatial_smooth: need p >= K+1 channels");
    const Eigen::Index M = d.p() - static_cast<Eigen::Index>(K);
    CorrelationMatrix r;
    const Eigen::Index n = d.length();
    r.factor.resize(q, M * n);
    for (Eigen::Index i = 0; i < M; ++i)
        r.factor.middleCols(i * n, n) = d.channels.middleRows(i, q) / std::sqrt(static_cast<double>(M));
    r.entries = r.factor * r.factor.adjoint();
    r.entries = (0.5 * (r.entries + r.entries.adjoint())).eval();
    r.vectors = d.length();
    r.smoothed = true;
    return r;
}

/// K x K eigen-step solver.
enum class EspritVariant
{
    ls, ///< Phi = pinv(E_down) * E_up
    tls ///< total least squares on [E_down | E_up]
};

/// Orthonormal basis of the K-dimensional signal subspace.
struct SubspaceBasis
{
    Eigen::MatrixXcd es;
    Eigen::VectorXd singular_values;
};

struct EspritResult
{
    DelaySet delays;
    std::vector<cplx> eigenvalues;
    SubspaceBasis subspace;
};

/// Map an ESPRIT eigenvalue exp(-j 2 pi t / T) back to t in [0,T).
inline double eigenvalue_to_delay(cplx lambda, double T)
{
    double t = -T / two_pi * std::arg(lambda);
    if (t < 0.0)
        t += T;
    if (t >= T)
        t = 0.0;
    return t;
}

/// Signal subspace: the K dominant left singular vectors of R.
inline SubspaceBasis signal_subspace(const CorrelationMatrix &r, std::size_t K, double rank_tol = 1e-10)
{
    const Eigen::Index k = static_cast<Eigen::Index>(K);
    if (K < 1 || r.size() < k + 1)
        throw InsufficientChannelsError("ESPRIT needs a correlation matrix of size >= K+1");
    const bool factored = r.factor.size() > 0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(factored ? r.factor : r.entries, Eigen::ComputeThinU);
    const Eigen::VectorXd s = factored ? Eigen::VectorXd(svd.singularValues().array().square())
                                       : Eigen::VectorXd(svd.singularValues());
    if (s.size() < k || !(s(0) > 0.0) || !(s(k - 1) > rank_tol * s(0)))
        throw RankDeficientError("signal subspace has fewer than K significant singular values");
    return {svd.matrixU().leftCols(k), s};
}

inline EspritResult esprit_solve(const CorrelationMatrix &r, std::size_t K, double T,
                                 EspritVariant variant = EspritVariant::tls, double rank_tol = 1e-10)
{
    SubspaceBasis basis = signal_subspace(r, K, rank_tol);
    const Eigen::Index k = static_cast<Eigen::Index>(K);
    const Eigen::Index q = basis.es.rows();
    const Eigen::MatrixXcd down = basis.es.topRows(q - 1);
    const Eigen::MatrixXcd up = basis.es.bottomRows(q - 1);

    Eigen::MatrixXcd phi;
    if (variant == EspritVariant::ls)
    {
        phi = down.completeOrthogonalDecomposition().solve(up);
    }
    else
    {
        Eigen::MatrixXcd stacked(q - 1, 2 * k);
        stacked << down, up;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
        const Eigen::MatrixXcd &v = svd.matrixV();
        const Eigen::MatrixXcd v12 = v.topRightCorner(k, k);
        const Eigen::MatrixXcd v22 = v.bottomRightCorner(k, k);
        phi = -v12 * v22.fullPivLu().inverse();
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(phi, false);
    if (eig.info() != Eigen::Success)
        throw NumericalError("ESPRIT: eigen-decomposition did not converge");

    EspritResult out;
    std::vector<double> t;
    for (Eigen::Index i = 0; i < k; ++i)
    {
        out.eigenvalues.push_back(eig.eigenvalues()(i));
        t.push_back(eigenvalue_to_delay(eig.eigenvalues()(i), T));
    }
    try
    {
        out.delays = DelaySet(std::move(t), T);
    }
    catch (const DegenerateModelError &)
    {
        throw RankDeficientError("ESPRIT produced coincident delays");
    }
    out.subspace = std::move(basis);
    return out;
}

/// ESPRIT on a (possibly smoothed) correlation matrix; delays sorted ascending in [0,T).
inline DelaySet esprit(const CorrelationMatrix &r, std::size_t K, double T, EspritVariant variant = EspritVariant::tls)
{
    return esprit_solve(r, K, T, variant).delays;
}

struct DelayEstimate
{
    DelaySet delays;
    std::size_t rank = 0; ///< effective rank of R_dd
    bool smoothed = false;
    std::vector<cplx> eigenvalues;
};

struct RecoveryOptions
{
    /// Relative threshold of effective_rank; 1e-6 suits noiseless data, 1e-2 noisy data.
    double rel_tol = 1e-6;
    EspritVariant variant = EspritVariant::tls;
};

/// Full delay recovery: runs ESPRIT on R_dd when it has rank >= K (uncorrelated case),
/// otherwise on the spatially smoothed correlation (correlated case).
inline DelayEstimate recover_delays(const MeasurementSet &d, std::size_t K, double T, const RecoveryOptions &opts = {})
{
    if (K < 1)
        throw ConfigError("recover_delays: K must be >= 1");
    if (d.p() < static_cast<Eigen::Index>(K) + 1)
        throw InsufficientChannelsError("recover_delays: need p >= K+1 channels");

    DelayEstimate out;
    const CorrelationMatrix rdd = correlation(d);
    out.rank = effective_rank(rdd, opts.rel_tol);
    if (out.rank == 0)
        throw RankDeficientError("recover_delays: measurements are identically zero");

    EspritResult res;
    if (out.rank >= K)
    {
        res = esprit_solve(rdd, K, T, opts.variant);
    }
    else
    {
        out.smoothed = true;
        res = esprit_solve(spatial_smooth(d, K), K, T, opts.variant);
    }
    out.delays = std::move(res.delays);
    out.eigenvalues = std::move(res.eigenvalues);
    return out;
}

} // namespace subnyquist

#endif // SUBNYQUIST_DELAY_RECOVERY_HPP
