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

#ifndef SUBNYQUIST_FRONTEND_HPP
#define SUBNYQUIST_FRONTEND_HPP

#include "subnyquist/dft.hpp"
#include "subnyquist/errors.hpp"
#include "subnyquist/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <variant>
#include <vector>

// Sampling front end: p channels, each filtering x(t) with s_l^*(-t) and sampling at t = nT.
// On the grid, c(w) = W(w) N(tau) b(w) with W = S * G and b(w) = D(w,tau) a(w).

namespace subnyquist
{

// ---- Filter banks ----------------------------------------------------------

/// S_l(w) = T on [2*pi*(l+gamma)/T, 2*pi*(l+1+gamma)/T), zero elsewhere. S(e^{jwT}) = I.
struct IdealBandpassBank
{
};

/// S_l(w) = T * exp(-j*w*Delta_l) on the whole working band: a delay followed by an ideal low pass.
struct DelayedLowpassBank
{
    std::vector<double> delays;
};

/// S_l(w) = taper(l, w) on band slot l, zero elsewhere.
struct TaperedBandpassBank
{
    std::function<cplx(int, double)> taper;
};

/// Explicit slot responses: values[j](l, m) = S_l(w_j + 2*pi*(m+gamma)/T).
struct TabulatedBank
{
    std::vector<Eigen::MatrixXcd> values;
};

using FilterBankSpec = std::variant<IdealBandpassBank, DelayedLowpassBank, TaperedBandpassBank, TabulatedBank>;

/// Non-flat bandpass bank 1.1 - (1 - 0.4*l) * cos(w*T - 2*pi*l), l = 1..p on consecutive bands.
inline FilterBankSpec cosine_tapered_bank(double T)
{
    return TaperedBandpassBank{[T](int ell, double omega) {
        const double l1 = static_cast<double>(ell + 1);
        return cplx(1.1 - (1.0 - 0.4 * l1) * std::cos(omega * T - two_pi * l1));
    }};
}

/// Uniformly spaced delayed channels, Delta_l = l*T/p.
inline FilterBankSpec uniform_delayed_bank(const BandConfig &cfg)
{
    DelayedLowpassBank bank;
    for (int l = 0; l < cfg.p; ++l)
        bank.delays.push_back(static_cast<double>(l) * cfg.T / cfg.p);
    return bank;
}

inline void validate_bank(const FilterBankSpec &bank, const BandConfig &cfg)
{
    cfg.validate();
    if (const auto *d = std::get_if<DelayedLowpassBank>(&bank))
    {
        if (static_cast<int>(d->delays.size()) != cfg.p)
            throw ConfigError("DelayedLowpassBank: need one delay per channel");
        for (double delta : d->delays)
            if (!(delta >= 0.0 && delta < cfg.T))
                throw DomainError("DelayedLowpassBank: channel delay outside [0,T)");
    }
    else if (const auto *t = std::get_if<TaperedBandpassBank>(&bank))
    {
        if (!t->taper)
            throw ConfigError("TaperedBandpassBank: missing taper function");
    }
    else if (const auto *tab = std::get_if<TabulatedBank>(&bank))
    {
        if (static_cast<int>(tab->values.size()) != cfg.n_grid)
            throw ConfigError("TabulatedBank: need one p x p matrix per grid bin");
        for (const auto &v : tab->values)
            if (v.rows() != cfg.p || v.cols() != cfg.p)
                throw ConfigError("TabulatedBank: matrices must be p x p");
    }
}

/// Continuous-frequency response S_l(w) of filter l (0-based).
inline cplx bank_response(const FilterBankSpec &bank, const BandConfig &cfg, int ell, double omega)
{
    const double lo = cfg.band_low(), hi = cfg.band_high();
    const double slot = two_pi / cfg.T;
    if (std::holds_alternative<IdealBandpassBank>(bank))
    {
        const double a = lo + slot * ell;
        return (omega >= a && omega < a + slot) ? cplx(cfg.T) : cplx(0.0);
    }
    if (const auto *d = std::get_if<DelayedLowpassBank>(&bank))
    {
        if (omega < lo || omega >= hi)
            return 0.0;
        return cfg.T * std::polar(1.0, -omega * d->delays[static_cast<std::size_t>(ell)]);
    }
    if (const auto *t = std::get_if<TaperedBandpassBank>(&bank))
    {
        const double a = lo + slot * ell;
        return (omega >= a && omega < a + slot) ? t->taper(ell, omega) : cplx(0.0);
    }
    throw DomainError("bank_response: tabulated bank has no continuous-frequency response");
}

/// S_l(w_j + 2*pi*(m+gamma)/T).
inline cplx bank_slot_value(const FilterBankSpec &bank, const BandConfig &cfg, int ell, int m, Eigen::Index j)
{
    if (const auto *tab = std::get_if<TabulatedBank>(&bank))
        return tab->values[static_cast<std::size_t>(j)](ell, m);
    return bank_response(bank, cfg, ell, cfg.slot_frequency(cfg.omega(j), m));
}

// ---- Measurements ----------------------------------------------------------

enum class MeasurementKind
{
    raw,      ///< c[n], straight out of the sampling channels
    corrected ///< d[n] = W^{-1} c, satisfying d[n] = N(tau) b[n]
};

/// p parallel sample sequences of common length; channel l is row l.
struct MeasurementSet
{
    Eigen::MatrixXcd channels;
    MeasurementKind kind = MeasurementKind::raw;
    BandConfig cfg;

    Eigen::Index p() const { return channels.rows(); }
    Eigen::Index length() const { return channels.cols(); }

    /// The first n measurement vectors d[0..n-1].
    MeasurementSet first(Eigen::Index n) const
    {
        if (n < 1 || n > length())
            throw ConfigError("MeasurementSet::first: count out of range");
        return {channels.leftCols(n), kind, cfg};
    }
};

// ---- Matrices on the grid --------------------------------------------------

/// Reciprocal condition threshold below which a matrix is treated as singular.
inline constexpr double singular_rcond = 1e-12;
/// Condition number above which a matrix is reported as not stably invertible.
inline constexpr double unstable_cond = 1e6;

inline double condition_number(const Eigen::MatrixXcd &m)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto &s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) == 0.0)
        return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
}

/// S(e^{jwT}) at grid bin j: S_lm = (1/T) * conj(S_l(w_j + 2*pi*(m+gamma)/T)).
inline Eigen::MatrixXcd s_matrix(const FilterBankSpec &bank, const BandConfig &cfg, Eigen::Index j)
{
    Eigen::MatrixXcd s(cfg.p, cfg.p);
    for (int l = 0; l < cfg.p; ++l)
        for (int m = 0; m < cfg.p; ++m)
            s(l, m) = std::conj(bank_slot_value(bank, cfg, l, m, j)) / cfg.T;
    return s;
}

namespace detail
{
inline Eigen::VectorXcd g_slots(const PulseSpec &pulse, const BandConfig &cfg, Eigen::Index j)
{
    Eigen::VectorXcd g(cfg.p);
    for (int m = 0; m < cfg.p; ++m)
        g(m) = pulse_slot_value(pulse, cfg, m, j);
    return g;
}
} // namespace detail

/// G(e^{jwT}) at grid bin j: diagonal with G(w_j + 2*pi*(m+gamma)/T).
/// Throws IllConditionedPulseError when the pulse violates the spectral bound anywhere on the grid.
inline Eigen::MatrixXcd g_diag(const PulseSpec &pulse, const BandConfig &cfg, Eigen::Index j)
{
    check_pulse_condition(pulse, cfg);
    return detail::g_slots(pulse, cfg, j).asDiagonal();
}

struct WMatrix
{
    Eigen::MatrixXcd value;
    double cond = 1.0;

    bool stable() const { return cond < unstable_cond; }
};

namespace detail
{
inline WMatrix w_matrix_unchecked(const FilterBankSpec &bank, const PulseSpec &pulse, const BandConfig &cfg,
                                  Eigen::Index j)
{
    WMatrix w;
    w.value = s_matrix(bank, cfg, j) * g_slots(pulse, cfg, j).asDiagonal();
    w.cond = condition_number(w.value);
    if (!(w.cond * singular_rcond < 1.0))
        throw FrontendSingularError(static_cast<std::size_t>(j), "W is numerically singular");
    return w;
}
} // namespace detail

/// W(e^{jwT}) = S * G at grid bin j, with its condition number.
inline WMatrix w_matrix(const FilterBankSpec &bank, const PulseSpec &pulse, const BandConfig &cfg, Eigen::Index j)
{
    validate_bank(bank, cfg);
    check_pulse_condition(pulse, cfg);
    return detail::w_matrix_unchecked(bank, pulse, cfg, j);
}

// ---- Synthesis -------------------------------------------------------------

namespace detail
{
inline Eigen::MatrixXcd pad_gains(const GainSequences &gains, const BandConfig &cfg)
{
    if (gains.cols() > cfg.n_grid)
        throw ConfigError("gain sequences longer than the DTFT grid");
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(gains.rows(), cfg.n_grid);
    a.leftCols(gains.cols()) = gains;
    return a;
}

inline void check_model(const DelaySet &tau, const GainSequences &gains, const BandConfig &cfg)
{
    cfg.validate();
    if (static_cast<Eigen::Index>(tau.size()) != gains.rows())
        throw ConfigError("one gain sequence per delay required");
    if (tau.period() != cfg.T)
        throw ConfigError("delay set period differs from BandConfig.T");
}
} // namespace detail

/// Channel samples c_l[n] under the cyclic convention (exact algebra on the N_f-point grid).
inline MeasurementSet synthesize_samples(const DelaySet &tau, const GainSequences &gains, const FilterBankSpec &bank,
                                         const PulseSpec &pulse, const BandConfig &cfg)
{
    detail::check_model(tau, gains, cfg);
    validate_bank(bank, cfg);
    check_pulse_condition(pulse, cfg);

    const Eigen::MatrixXcd a_hat = dft::forward_rows(detail::pad_gains(gains, cfg));
    const Eigen::MatrixXcd n = vandermonde(tau, cfg).entries;
    Eigen::MatrixXcd c_hat(cfg.p, cfg.n_grid);
    for (Eigen::Index j = 0; j < cfg.n_grid; ++j)
    {
        const Eigen::VectorXcd b = delay_phases(cfg.omega(j), tau).cwiseProduct(a_hat.col(j));
        c_hat.col(j) = detail::w_matrix_unchecked(bank, pulse, cfg, j).value * (n * b);
    }
    return {dft::inverse_rows(c_hat), MeasurementKind::raw, cfg};
}

/// Brute-force c_l[n] from the aliasing sum over continuous responses, with the aperiodic DTFT of
/// each a_k and midpoint quadrature of the inverse DTFT over [0, 2*pi/T). Test oracle only.
inline MeasurementSet oracle_samples(const DelaySet &tau, const GainSequences &gains, const FilterBankSpec &bank,
                                     const PulseSpec &pulse, const BandConfig &cfg, Eigen::Index quad_points)
{
    detail::check_model(tau, gains, cfg);
    validate_bank(bank, cfg);
    if (quad_points < 1)
        throw ConfigError("oracle_samples: quad_points must be positive");

    const Eigen::Index K = gains.rows();
    const double dw = two_pi / (static_cast<double>(quad_points) * cfg.T);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(cfg.p, cfg.n_grid);
    std::vector<cplx> a_dtft(static_cast<std::size_t>(K));
    std::vector<cplx> c_w(static_cast<std::size_t>(cfg.p));

    for (Eigen::Index q = 0; q < quad_points; ++q)
    {
        const double w = (static_cast<double>(q) + 0.5) * dw;
        // A_k(e^{jwT}) = sum_n a_k[n] z^n with z = exp(-j w T), by Horner.
        const cplx z = std::polar(1.0, -w * cfg.T);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            cplx acc = 0.0;
            for (Eigen::Index n = gains.cols() - 1; n >= 0; --n)
                acc = acc * z + gains(k, n);
            a_dtft[static_cast<std::size_t>(k)] = acc;
        }
        // Alias images nu = w + 2*pi*s/T; one guard slot on each side of the working band.
        for (int l = 0; l < cfg.p; ++l)
        {
            cplx acc = 0.0;
            for (int s = cfg.gamma - 1; s <= cfg.gamma + cfg.p; ++s)
            {
                const double nu = w + two_pi * static_cast<double>(s) / cfg.T;
                const cplx sg = std::conj(bank_response(bank, cfg, l, nu)) * pulse_spectrum(pulse, cfg, nu);
                if (sg == cplx(0.0))
                    continue;
                for (Eigen::Index k = 0; k < K; ++k)
                    acc += a_dtft[static_cast<std::size_t>(k)] * sg *
                           std::polar(1.0, -nu * tau[static_cast<std::size_t>(k)]);
            }
            c_w[static_cast<std::size_t>(l)] = acc / cfg.T;
        }
        const cplx step = std::polar(1.0, w * cfg.T);
        cplx rot = 1.0;
        for (Eigen::Index n = 0; n < cfg.n_grid; ++n)
        {
            for (int l = 0; l < cfg.p; ++l)
                out(l, n) += c_w[static_cast<std::size_t>(l)] * rot;
            rot *= step;
        }
    }
    out /= static_cast<double>(quad_points);
    return {std::move(out), MeasurementKind::raw, cfg};
}

/// Adds i.i.d. circular complex Gaussian noise; sigma^2 = (mean |sample|^2 over all channels) / 10^(snr/10).
/// snr_db = +infinity returns the input unchanged.
inline MeasurementSet add_noise(const MeasurementSet &m, double snr_db, std::uint64_t seed)
{
    if (std::isinf(snr_db) && snr_db > 0.0)
        return m;
    if (!std::isfinite(snr_db))
        throw ConfigError("add_noise: SNR must be finite or +inf");
    const double signal_power = m.channels.squaredNorm() / static_cast<double>(m.channels.size());
    const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0) / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MeasurementSet out = m;
    for (Eigen::Index n = 0; n < out.channels.cols(); ++n)
        for (Eigen::Index l = 0; l < out.channels.rows(); ++l)
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            out.channels(l, n) += sigma * cplx(re, im);
        }
    return out;
}

} // namespace subnyquist

#endif // SUBNYQUIST_FRONTEND_HPP
