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

#ifndef SUBNYQUIST_MODEL_HPP
#define SUBNYQUIST_MODEL_HPP

#include "subnyquist/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

// Signal model x(t) = sum_k sum_n a_k[n] g(t - t_k - nT):
//   K unknown delays t_k in [0,T), K gain sequences a_k[n], a known pulse g(t).
// All DTFT-domain quantities live on the grid w_j = 2*pi*j/(N_f*T), j = 0..N_f-1,
// and sequences are N_f-periodic inside the algebraic pipeline.

namespace subnyquist
{

using cplx = std::complex<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Sampling configuration: p channels on the working band F = [2*pi*gamma/T, 2*pi*(p+gamma)/T].
struct BandConfig
{
    int p = 1;
    int gamma = 0;
    double T = 1.0;
    int n_grid = 128;

    void validate() const
    {
        if (p < 1)
            throw ConfigError("BandConfig: p must be >= 1");
        if (n_grid < 1)
            throw ConfigError("BandConfig: n_grid must be >= 1");
        if (!(T > 0.0) || !std::isfinite(T))
            throw ConfigError("BandConfig: T must be positive and finite");
    }

    /// Grid frequency w_j in rad/s.
    double omega(Eigen::Index j) const { return two_pi * static_cast<double>(j) / (static_cast<double>(n_grid) * T); }

    /// Absolute frequency of aliasing slot m (0-based) seen from base frequency w in [0, 2*pi/T).
    double slot_frequency(double omega, int m) const { return omega + two_pi * static_cast<double>(m + gamma) / T; }

    double band_low() const { return two_pi * gamma / T; }
    double band_high() const { return two_pi * (p + gamma) / T; }
};

/// K distinct delays in [0,T), stored sorted ascending.
class DelaySet
{
public:
    DelaySet() = default;

    DelaySet(std::vector<double> delays, double T) : values_(std::move(delays)), T_(T)
    {
        if (!(T > 0.0))
            throw ConfigError("DelaySet: T must be positive");
        for (double t : values_)
            if (!(t >= 0.0 && t < T))
                throw DomainError("DelaySet: delay " + std::to_string(t) + " outside [0,T)");
        std::sort(values_.begin(), values_.end());
        for (std::size_t i = 1; i < values_.size(); ++i)
            if (values_[i] == values_[i - 1])
                throw DegenerateModelError("DelaySet: duplicate delay " + std::to_string(values_[i]));
    }

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double period() const noexcept { return T_; }
    const std::vector<double> &values() const noexcept { return values_; }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

private:
    std::vector<double> values_;
    double T_ = 1.0;
};

/// K gain sequences a_k[n], one per row; all share the column count N.
using GainSequences = Eigen::MatrixXcd;

// ---- Pulse spectra -------------------------------------------------------

/// G(w) = T on the working band F (zero outside).
struct FlatOnBandPulse
{
};

/// g(t) = delta(t), G(w) = 1 everywhere.
struct DiracPulse
{
};

/// Spectrum values on the aliasing slots of the grid: values(m, j) = G(w_j + 2*pi*(m+gamma)/T).
struct TabulatedPulse
{
    Eigen::MatrixXcd values;
};

using PulseSpec = std::variant<FlatOnBandPulse, DiracPulse, TabulatedPulse>;

/// Continuous-frequency pulse spectrum. Tabulated pulses have no off-grid values.
inline cplx pulse_spectrum(const PulseSpec &pulse, const BandConfig &cfg, double omega)
{
    if (std::holds_alternative<FlatOnBandPulse>(pulse))
        return (omega >= cfg.band_low() && omega < cfg.band_high()) ? cplx(cfg.T) : cplx(0.0);
    if (std::holds_alternative<DiracPulse>(pulse))
        return 1.0;
    throw DomainError("pulse_spectrum: tabulated pulse has no continuous-frequency response");
}

/// G(w_j + 2*pi*(m+gamma)/T) for grid bin j and slot m.
inline cplx pulse_slot_value(const PulseSpec &pulse, const BandConfig &cfg, int m, Eigen::Index j)
{
    if (const auto *tab = std::get_if<TabulatedPulse>(&pulse))
    {
        if (tab->values.rows() != cfg.p || tab->values.cols() != cfg.n_grid)
            throw ConfigError("TabulatedPulse: expected p x n_grid values");
        return tab->values(m, j);
    }
    return pulse_spectrum(pulse, cfg, cfg.slot_frequency(cfg.omega(j), m));
}

/// Checks 0 < a <= |G| on every grid slot; a is taken as rel_floor * max|G|.
inline void check_pulse_condition(const PulseSpec &pulse, const BandConfig &cfg, double rel_floor = 1e-8)
{
    double gmax = 0.0, gmin = std::numeric_limits<double>::infinity();
    Eigen::Index jmin = 0;
    int mmin = 0;
    for (Eigen::Index j = 0; j < cfg.n_grid; ++j)
        for (int m = 0; m < cfg.p; ++m)
        {
            const double g = std::abs(pulse_slot_value(pulse, cfg, m, j));
            if (!std::isfinite(g))
                throw IllConditionedPulseError("pulse spectrum is not finite on the working band");
            gmax = std::max(gmax, g);
            if (g < gmin)
            {
                gmin = g;
                jmin = j;
                mmin = m;
            }
        }
    if (!(gmin > rel_floor * gmax))
        throw IllConditionedPulseError("pulse spectrum vanishes on the working band (slot " + std::to_string(mmin) +
                                       ", bin " + std::to_string(jmin) + ")");
}

// ---- Structured matrices -------------------------------------------------

/// n(t): element m (0-based) is exp(-j*(2*pi/T)*(m+gamma)*t).
inline Eigen::VectorXcd steering_vector(double t, const BandConfig &cfg)
{
    cfg.validate();
    if (!(t >= 0.0 && t < cfg.T))
        throw DomainError("steering_vector: delay outside [0,T)");
    Eigen::VectorXcd v(cfg.p);
    for (int m = 0; m < cfg.p; ++m)
        v(m) = std::polar(1.0, -two_pi * static_cast<double>(m + cfg.gamma) * t / cfg.T);
    return v;
}

/// p x K Vandermonde matrix N(tau) together with what it was built from.
struct SteeringMatrix
{
    Eigen::MatrixXcd entries;
    BandConfig cfg;
    DelaySet tau;
};

inline SteeringMatrix vandermonde(const DelaySet &tau, const BandConfig &cfg)
{
    cfg.validate();
    Eigen::MatrixXcd n(cfg.p, static_cast<Eigen::Index>(tau.size()));
    for (std::size_t k = 0; k < tau.size(); ++k)
        n.col(static_cast<Eigen::Index>(k)) = steering_vector(tau[k], cfg);
    return {std::move(n), cfg, tau};
}

/// Diagonal of D(w, tau): exp(-j*w*t_k).
inline Eigen::VectorXcd delay_phases(double omega, const DelaySet &tau)
{
    Eigen::VectorXcd d(static_cast<Eigen::Index>(tau.size()));
    for (std::size_t k = 0; k < tau.size(); ++k)
        d(static_cast<Eigen::Index>(k)) = std::polar(1.0, -omega * tau[k]);
    return d;
}

/// D(w, tau) as a dense K x K diagonal matrix.
inline Eigen::MatrixXcd delay_phase_diag(double omega, const DelaySet &tau)
{
    return delay_phases(omega, tau).asDiagonal();
}

/// Diagonal of R(tau), the rotation relating the shifted row blocks of N(tau).
inline Eigen::VectorXcd rotation_phases(const DelaySet &tau)
{
    return delay_phases(two_pi / tau.period(), tau);
}

// ---- Fading gains ----------------------------------------------------------

struct JakesOptions
{
    /// Number of equal-power sinusoids in the sum-of-sinusoids realization.
    int oscillators = 32;
    /// Rescale each realization to exactly `power` mean-square (default: power holds in expectation).
    bool normalize_per_realization = false;
};

/// Rayleigh fading sequence alpha[n] = alpha(nT) with the classical U-shaped Doppler spectrum.
///
/// Sum of `oscillators` sinusoids with arrival angles (2*pi*i - pi + psi)/M and independent
/// phases; the ensemble autocorrelation is power * J0(2*pi*f_d*m*T).
inline Eigen::VectorXcd jakes_gains(double f_d, double T, Eigen::Index n, double power, std::uint64_t seed,
                                    const JakesOptions &opts = {})
{
    if (!(f_d >= 0.0) || n < 1 || !(power > 0.0) || opts.oscillators < 1)
        throw ConfigError("jakes_gains: need f_d >= 0, n >= 1, power > 0, oscillators >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-std::numbers::pi, std::numbers::pi);
    const int M = opts.oscillators;
    const double psi = uni(rng);
    std::vector<double> doppler(static_cast<std::size_t>(M));
    std::vector<double> phase(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i)
    {
        const double angle = (two_pi * (i + 1) - std::numbers::pi + psi) / M;
        doppler[static_cast<std::size_t>(i)] = two_pi * f_d * T * std::cos(angle);
        phase[static_cast<std::size_t>(i)] = uni(rng);
    }
    Eigen::VectorXcd out(n);
    const double scale = std::sqrt(power / M);
    for (Eigen::Index t = 0; t < n; ++t)
    {
        cplx acc = 0.0;
        for (int i = 0; i < M; ++i)
            acc += std::polar(1.0, doppler[static_cast<std::size_t>(i)] * static_cast<double>(t) +
                                       phase[static_cast<std::size_t>(i)]);
        out(t) = scale * acc;
    }
    if (opts.normalize_per_realization)
    {
        const double ms = out.squaredNorm() / static_cast<double>(n);
        if (ms > 0.0)
            out *= std::sqrt(power / ms);
    }
    return out;
}

enum class PowerProfile
{
    decreasing, ///< (1/2)^(k-1): 1, 1/2, 1/4, ...
    increasing  ///< (1/2)^(-k+1): 1, 2, 4, ...
};

inline std::vector<double> path_powers(std::size_t K, PowerProfile profile)
{
    std::vector<double> out(K);
    for (std::size_t k = 0; k < K; ++k)
        out[k] = profile == PowerProfile::decreasing ? std::pow(0.5, static_cast<double>(k))
                                                     : std::pow(2.0, static_cast<double>(k));
    return out;
}

} // namespace subnyquist

#endif // SUBNYQUIST_MODEL_HPP
