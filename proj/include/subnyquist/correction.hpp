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

#ifndef SUBNYQUIST_CORRECTION_HPP
#define SUBNYQUIST_CORRECTION_HPP

#include "subnyquist/dft.hpp"
#include "subnyquist/errors.hpp"
#include "subnyquist/frontend.hpp"
#include "subnyquist/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

// Digital correction filter bank W^{-1}(e^{jwT}), turning raw samples c[n] into d[n] = N(tau) b[n].

namespace subnyquist
{

enum class CorrectionMode
{
    exact_grid,
    fir
};

enum class FirWindow
{
    rectangular,
    raised_cosine
};

struct CorrectionBank
{
    CorrectionMode mode = CorrectionMode::exact_grid;
    BandConfig cfg;
    /// exact_grid: W^{-1}(w_j) for every grid bin.
    std::vector<Eigen::MatrixXcd> inverses;
    /// fir: p x p tap matrices for lags -(L-1)/2 .. (L-1)/2, in that order.
    std::vector<Eigen::MatrixXcd> taps;
    /// Condition number of W at each bin of the grid the bank was built on.
    std::vector<double> cond_log;
    /// Lag of the centre tap; apply() compensates it so d[n] stays aligned with c[n].
    int group_delay = 0;

    int length() const { return static_cast<int>(taps.size()); }

    bool stable() const
    {
        return std::all_of(cond_log.begin(), cond_log.end(), [](double c) { return c < unstable_cond; });
    }

    /// FIR frequency response sum_i h_i exp(-j w lag_i T) at an arbitrary frequency.
    Eigen::MatrixXcd fir_response(double omega) const
    {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(cfg.p, cfg.p);
        for (int i = 0; i < length(); ++i)
            h += taps[static_cast<std::size_t>(i)] * std::polar(1.0, -omega * (i - group_delay) * cfg.T);
        return h;
    }
};

namespace detail
{
inline std::vector<Eigen::MatrixXcd> invert_on_grid(const FilterBankSpec &bank, const PulseSpec &pulse,
                                                    const BandConfig &grid, std::vector<double> &cond_log)
{
    validate_bank(bank, grid);
    check_pulse_condition(pulse, grid);
    std::vector<Eigen::MatrixXcd> inv;
    inv.reserve(static_cast<std::size_t>(grid.n_grid));
    cond_log.clear();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(grid.p, grid.p);
    for (Eigen::Index j = 0; j < grid.n_grid; ++j)
    {
        const WMatrix w = w_matrix_unchecked(bank, pulse, grid, j);
        Eigen::MatrixXcd wi = w.value.fullPivLu().inverse();
        const double residual = (w.value * wi - eye).cwiseAbs().maxCoeff();
        if (!(residual < 1e-10))
            throw FrontendSingularError(static_cast<std::size_t>(j), "inverse residual too large");
        cond_log.push_back(w.cond);
        inv.push_back(std::move(wi));
    }
    return inv;
}
} // namespace detail

/// Exact per-bin inverses of W on the configuration grid.
inline CorrectionBank build_exact(const FilterBankSpec &bank, const PulseSpec &pulse, const BandConfig &cfg)
{
    CorrectionBank out;
    out.mode = CorrectionMode::exact_grid;
    out.cfg = cfg;
    out.inverses = detail::invert_on_grid(bank, pulse, cfg, out.cond_log);
    return out;
}

/// Truncated inverse-DTFT design: h[l] = (1/G) sum_j W^{-1}(w_j) exp(j w_j l T) on a dense grid of
/// G = 8*N_f bins (N_f for tabulated banks, which exist only on the configuration grid), kept for |l| <= (L-1)/2.
inline CorrectionBank design_fir(const FilterBankSpec &bank, const PulseSpec &pulse, const BandConfig &cfg, int taps,
                                 FirWindow window = FirWindow::rectangular)
{
    cfg.validate();
    if (taps < 1 || taps % 2 == 0)
        throw ConfigError("design_fir: tap count must be odd and positive");
    if (taps > cfg.n_grid)
        throw ConfigError("design_fir: tap count exceeds the grid length");

    const bool tabulated = std::holds_alternative<TabulatedBank>(bank) || std::holds_alternative<TabulatedPulse>(pulse);
    BandConfig dense = cfg;
    if (!tabulated)
        dense.n_grid = 8 * cfg.n_grid;

    CorrectionBank out;
    out.mode = CorrectionMode::fir;
    out.cfg = cfg;
    out.group_delay = (taps - 1) / 2;
    const std::vector<Eigen::MatrixXcd> inv = detail::invert_on_grid(bank, pulse, dense, out.cond_log);

    const int half = out.group_delay;
    out.taps.assign(static_cast<std::size_t>(taps), Eigen::MatrixXcd::Zero(cfg.p, cfg.p));
    for (int i = 0; i < taps; ++i)
    {
        const int lag = i - half;
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(cfg.p, cfg.p);
        for (Eigen::Index j = 0; j < dense.n_grid; ++j)
            h += inv[static_cast<std::size_t>(j)] *
                 std::polar(1.0, two_pi * static_cast<double>(j) * lag / static_cast<double>(dense.n_grid));
        h /= static_cast<double>(dense.n_grid);
        if (window == FirWindow::raised_cosine)
            h *= 0.5 * (1.0 + std::cos(std::numbers::pi * lag / (half + 1.0)));
        out.taps[static_cast<std::size_t>(i)] = std::move(h);
    }
    return out;
}

/// d = W^{-1} c. Exact mode multiplies per DFT bin; FIR mode is a cyclic multichannel convolution
/// with the centred taps, so the group delay is already compensated.
inline MeasurementSet apply(const CorrectionBank &bank, const MeasurementSet &c)
{
    if (c.p() != bank.cfg.p)
        throw ConfigError("apply: channel count mismatch");
    if (bank.mode == CorrectionMode::exact_grid)
    {
        if (c.length() != bank.cfg.n_grid || static_cast<Eigen::Index>(bank.inverses.size()) != c.length())
            throw ConfigError("apply: measurement length differs from the correction grid");
        Eigen::MatrixXcd spec = dft::forward_rows(c.channels);
        for (Eigen::Index j = 0; j < spec.cols(); ++j)
            spec.col(j) = bank.inverses[static_cast<std::size_t>(j)] * spec.col(j);
        return {dft::inverse_rows(spec), MeasurementKind::corrected, c.cfg};
    }

    const Eigen::Index n = c.length();
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(c.p(), n);
    for (int i = 0; i < bank.length(); ++i)
    {
        const int lag = i - bank.group_delay;
        const Eigen::MatrixXcd &h = bank.taps[static_cast<std::size_t>(i)];
        for (Eigen::Index t = 0; t < n; ++t)
        {
            Eigen::Index src = (t - lag) % n;
            if (src < 0)
                src += n;
            d.col(t) += h * c.channels.col(src);
        }
    }
    return {std::move(d), MeasurementKind::corrected, c.cfg};
}

} // namespace subnyquist

#endif // SUBNYQUIST_CORRECTION_HPP
