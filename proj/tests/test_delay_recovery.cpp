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

#include "catch_amalgamated.hpp"

#include "subnyquist/correction.hpp"
#include "subnyquist/delay_recovery.hpp"

#include <random>

using namespace subnyquist;
using Catch::Matchers::WithinAbs;

namespace
{

double max_abs_diff(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) { return (a - b).cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64 &rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = cplx(g(rng), g(rng));
    return m;
}

/// Corrected measurements d[n] = N(tau) b[n] built directly.
MeasurementSet direct_measurements(const DelaySet &tau, const Eigen::MatrixXcd &b, const BandConfig &cfg)
{
    return {vandermonde(tau, cfg).entries * b, MeasurementKind::corrected, cfg};
}

double max_circular_error(const DelaySet &est, const DelaySet &truth)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
    {
        const double d = std::fabs(est[k] - truth[k]);
        worst = std::max(worst, std::min(d, truth.period() - d));
    }
    return worst;
}

DelaySet separated_delays(std::size_t K, double min_sep, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;)
    {
        std::vector<double> t(K);
        for (auto &v : t)
            v = u(rng);
        std::sort(t.begin(), t.end());
        bool ok = true;
        for (std::size_t k = 0; k < K; ++k)
        {
            const double next = k + 1 < K ? t[k + 1] : t[0] + 1.0;
            ok = ok && next - t[k] >= min_sep;
        }
        if (ok)
            return DelaySet(t, 1.0);
    }
}

const RecoveryOptions noiseless{1e-6, EspritVariant::tls};

} // namespace

TEST_CASE("correlation examples", "[delay]")
{
    const BandConfig cfg{3, 0, 1.0, 1};
    MeasurementSet e1{Eigen::MatrixXcd::Zero(3, 1), MeasurementKind::corrected, cfg};
    e1.channels(0, 0) = 1.0;
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(3, 3);
    expect(0, 0) = 1.0;
    const CorrelationMatrix r = correlation(e1);
    CHECK(max_abs_diff(r.entries, expect) < 1e-15);
    CHECK(r.vectors == 1);
    CHECK_FALSE(r.smoothed);

    std::mt19937_64 rng(41);
    const MeasurementSet d{random_matrix(4, 30, rng), MeasurementKind::corrected, BandConfig{4, 0, 1.0, 30}};
    const CorrelationMatrix rd = correlation(d);
    CHECK_THAT(rd.entries.trace().real(), WithinAbs(d.channels.squaredNorm(), 1e-10));
    CHECK(max_abs_diff(rd.entries, rd.entries.adjoint()) < 1e-12);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rd.entries).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10 * rd.entries.trace().real());
}

TEST_CASE("rank(R_dd) equals rank(R_bb)", "[delay]")
{
    std::mt19937_64 rng(42);
    const BandConfig cfg{5, 0, 1.0, 40};
    const DelaySet tau({0.1, 0.35, 0.8}, 1.0);
    auto count = [](const CorrelationMatrix &r) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r.entries);
        const auto &s = svd.singularValues();
        return static_cast<int>((s.array() > 1e-9 * s(0)).count());
    };
    const Eigen::MatrixXcd full = random_matrix(3, 40, rng);
    const Eigen::MatrixXcd one = random_matrix(3, 1, rng) * random_matrix(1, 40, rng);
    CHECK(count(correlation(direct_measurements(tau, full, cfg))) == 3);
    CHECK(count(correlation(direct_measurements(tau, one, cfg))) == 1);
}

TEST_CASE("effective_rank examples", "[delay]")
{
    CorrelationMatrix r;
    r.entries = Eigen::MatrixXcd::Identity(4, 4);
    CHECK(effective_rank(r, 1e-6) == 4);
    r.entries.setZero();
    r.entries(0, 0) = 1.0;
    CHECK(effective_rank(r, 1e-6) == 1);
    r.entries.setZero();
    CHECK(effective_rank(r, 1e-6) == 0);
    CHECK_THROWS_AS(effective_rank(r, 0.0), ConfigError);
    CHECK_THROWS_AS(effective_rank(r, 1.0), ConfigError);
}

TEST_CASE("coherent gains trigger the correlated path", "[delay]")
{
    const BandConfig cfg{4, 0, 1.0, 64};
    const DelaySet tau({0.4352, 0.521}, 1.0);
    Eigen::MatrixXcd b(2, 64);
    for (Eigen::Index n = 0; n < 64; ++n)
    {
        b(0, n) = std::polar(1.0, 0.3 * static_cast<double>(n));
        b(1, n) = cplx(0.0, 2.0) * b(0, n);
    }
    const MeasurementSet d = direct_measurements(tau, b, cfg);
    CHECK(effective_rank(correlation(d), 1e-6) == 1);
    const DelayEstimate est = recover_delays(d, 2, 1.0, noiseless);
    CHECK(est.smoothed);
    CHECK(est.rank == 1);
    CHECK(max_circular_error(est.delays, tau) < 1e-8);
}

TEST_CASE("spatial_smooth examples", "[delay]")
{
    std::mt19937_64 rng(43);
    const BandConfig p3{3, 0, 1.0, 20};
    const MeasurementSet single = direct_measurements(DelaySet({0.27}, 1.0), random_matrix(1, 20, rng), p3);
    const CorrelationMatrix r1 = spatial_smooth(single, 1);
    CHECK(r1.size() == 2);
    CHECK(r1.smoothed);
    CHECK(effective_rank(r1, 1e-9) == 1);

    const BandConfig p4{4, 0, 1.0, 20};
    const Eigen::MatrixXcd coherent = random_matrix(2, 1, rng) * random_matrix(1, 20, rng);
    const MeasurementSet d = direct_measurements(DelaySet({0.2, 0.7}, 1.0), coherent, p4);
    CHECK(effective_rank(correlation(d), 1e-9) == 1);
    const CorrelationMatrix rs = spatial_smooth(d, 2);
    CHECK(effective_rank(rs, 1e-9) == 2);
    CHECK(max_abs_diff(rs.entries, rs.entries.adjoint()) < 1e-12);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rs.entries).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10 * rs.entries.trace().real());

    CHECK_THROWS_AS(spatial_smooth(d, 4), InsufficientChannelsError);
}

TEST_CASE("esprit: single steering vector", "[delay]")
{
    const BandConfig cfg{3, 0, 1.0, 1};
    const Eigen::VectorXcd n = steering_vector(0.3, cfg);
    CorrelationMatrix r;
    r.entries = n * n.adjoint();
    for (EspritVariant v : {EspritVariant::ls, EspritVariant::tls})
    {
        const DelaySet t = esprit(r, 1, 1.0, v);
        CHECK_THAT(t[0], WithinAbs(0.3, 1e-12));
    }
}

TEST_CASE("esprit: two close delays, unit-modulus eigenvalues, LS equals TLS", "[delay]")
{
    std::mt19937_64 rng(44);
    const BandConfig cfg{4, 0, 1.0, 100};
    const DelaySet tau({0.4352, 0.521}, 1.0);
    const CorrelationMatrix r = correlation(direct_measurements(tau, random_matrix(2, 100, rng), cfg));
    const EspritResult tls = esprit_solve(r, 2, 1.0, EspritVariant::tls);
    const EspritResult ls = esprit_solve(r, 2, 1.0, EspritVariant::ls);
    CHECK(max_circular_error(tls.delays, tau) < 1e-9);
    for (std::size_t k = 0; k < 2; ++k)
    {
        CHECK_THAT(std::abs(tls.eigenvalues[k]), WithinAbs(1.0, 1e-9));
        CHECK_THAT(std::abs(ls.eigenvalues[k]), WithinAbs(1.0, 1e-9));
        CHECK_THAT(ls.delays[k], WithinAbs(tls.delays[k], 1e-9));
    }
    const Eigen::MatrixXcd gram = tls.subspace.es.adjoint() * tls.subspace.es;
    CHECK(max_abs_diff(gram, Eigen::MatrixXcd::Identity(2, 2)) < 1e-10);
}

TEST_CASE("esprit rejects rank-deficient input and wraps negative phases", "[delay]")
{
    CorrelationMatrix r;
    r.entries = Eigen::MatrixXcd::Zero(4, 4);
    r.entries(0, 0) = 1.0;
    CHECK_THROWS_AS(esprit(r, 2, 1.0), RankDeficientError);
    CHECK_THROWS_AS(esprit(r, 4, 1.0), InsufficientChannelsError);

    CHECK_THAT(eigenvalue_to_delay(std::polar(1.0, -two_pi * 0.25), 1.0), WithinAbs(0.25, 1e-15));
    CHECK_THAT(eigenvalue_to_delay(std::polar(1.0, two_pi * 0.25), 1.0), WithinAbs(0.75, 1e-15));
    CHECK_THAT(eigenvalue_to_delay(cplx(-1.0, 0.0), 2.0), WithinAbs(1.0, 1e-15));
    const double t = eigenvalue_to_delay(std::polar(1.0, -1e-18), 1.0);
    CHECK((t >= 0.0 && t < 1.0));
}

TEST_CASE("recover_delays: uncorrelated Jakes gains through the full front end", "[delay]")
{
    const BandConfig cfg{4, 0, 1.0, 128};
    const DelaySet tau({0.4352, 0.521}, 1.0);
    GainSequences a(2, 100);
    a.row(0) = jakes_gains(0.05, 1.0, 100, 1.0, 1).transpose();
    a.row(1) = jakes_gains(0.05, 1.0, 100, 1.0, 2).transpose();
    const MeasurementSet d = apply(build_exact(IdealBandpassBank{}, FlatOnBandPulse{}, cfg),
                                   synthesize_samples(tau, a, IdealBandpassBank{}, FlatOnBandPulse{}, cfg));
    const DelayEstimate est = recover_delays(d, 2, 1.0, noiseless);
    CHECK_FALSE(est.smoothed);
    CHECK(est.rank >= 2);
    CHECK(max_circular_error(est.delays, tau) < 1e-8);
}

TEST_CASE("recover_delays: K+1 channels suffice for rank-K gains", "[delay]")
{
    std::mt19937_64 rng(45);
    const BandConfig cfg{5, 0, 1.0, 100};
    for (int trial = 0; trial < 10; ++trial)
    {
        const DelaySet tau = separated_delays(4, 1e-2, rng);
        const DelayEstimate est = recover_delays(direct_measurements(tau, random_matrix(4, 100, rng), cfg), 4, 1.0, noiseless);
        CHECK(max_circular_error(est.delays, tau) < 1e-8);
    }
}

TEST_CASE("recover_delays: uniqueness regime over 200 random trials", "[delay][property]")
{
    std::mt19937_64 rng(46);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial)
    {
        const std::size_t K = 1 + static_cast<std::size_t>(trial % 4);
        const int p = 2 * static_cast<int>(K) + trial % 3;
        const BandConfig cfg{p, trial % 3 - 1, 1.0, 64};
        const DelaySet tau = separated_delays(K, 1e-3, rng);
        const bool coherent = trial % 2 == 1;
        const Eigen::MatrixXcd b = coherent ? Eigen::MatrixXcd(random_matrix(static_cast<Eigen::Index>(K), 1, rng) *
                                                                random_matrix(1, 64, rng))
                                            : random_matrix(static_cast<Eigen::Index>(K), 64, rng);
        const DelayEstimate est = recover_delays(direct_measurements(tau, b, cfg), K, 1.0, noiseless);
        worst = std::max(worst, max_circular_error(est.delays, tau));
    }
    INFO("worst delay error " << worst);
    CHECK(worst < 1e-8);
}

TEST_CASE("recover_delays: shift covariance", "[delay][property]")
{
    std::mt19937_64 rng(47);
    const BandConfig cfg{4, 0, 1.0, 50};
    const Eigen::MatrixXcd b = random_matrix(2, 50, rng);
    const DelaySet tau({0.3, 0.62}, 1.0);
    const DelayEstimate base = recover_delays(direct_measurements(tau, b, cfg), 2, 1.0, noiseless);
    for (double s : {0.05, 0.25, 0.5})
    {
        std::vector<double> shifted;
        for (double t : tau)
            shifted.push_back(std::fmod(t + s, 1.0));
        // Shifting every delay by s multiplies row m of d[n] by exp(-j 2 pi m s / T).
        Eigen::MatrixXcd d = direct_measurements(tau, b, cfg).channels;
        for (int m = 0; m < 4; ++m)
            d.row(m) *= std::polar(1.0, -two_pi * m * s);
        const DelayEstimate est = recover_delays({d, MeasurementKind::corrected, cfg}, 2, 1.0, noiseless);
        CHECK(max_circular_error(est.delays, DelaySet(shifted, 1.0)) < 1e-8);
        std::vector<double> back;
        for (double t : est.delays)
            back.push_back(std::fmod(t - s + 1.0, 1.0));
        CHECK(max_circular_error(DelaySet(back, 1.0), base.delays) < 1e-8);
    }
}

TEST_CASE("recover_delays: complex scale invariance", "[delay][property]")
{
    std::mt19937_64 rng(48);
    const BandConfig cfg{5, 0, 1.0, 60};
    const DelaySet tau({0.11, 0.5, 0.77}, 1.0);
    const MeasurementSet d = direct_measurements(tau, random_matrix(3, 60, rng), cfg);
    const DelayEstimate base = recover_delays(d, 3, 1.0, noiseless);
    for (cplx c : {cplx(1e-3, 0.0), cplx(-2.0, 5.0), cplx(0.0, 1e4)})
    {
        const MeasurementSet scaled{c * d.channels, d.kind, cfg};
        const DelayEstimate est = recover_delays(scaled, 3, 1.0, noiseless);
        CHECK(max_circular_error(est.delays, base.delays) < 1e-12);
    }
}

TEST_CASE("smoothed and unsmoothed paths agree on uncorrelated data", "[delay][property]")
{
    std::mt19937_64 rng(49);
    const BandConfig cfg{6, 0, 1.0, 80};
    const DelaySet tau({0.05, 0.4, 0.9}, 1.0);
    const MeasurementSet d = direct_measurements(tau, random_matrix(3, 80, rng), cfg);
    const DelaySet plain = esprit(correlation(d), 3, 1.0);
    const DelaySet smoothed = esprit(spatial_smooth(d, 3), 3, 1.0);
    CHECK(max_circular_error(plain, tau) < 1e-8);
    CHECK(max_circular_error(smoothed, tau) < 1e-8);
}

TEST_CASE("recover_delays input errors", "[delay]")
{
    const BandConfig cfg{3, 0, 1.0, 10};
    const MeasurementSet zero{Eigen::MatrixXcd::Zero(3, 10), MeasurementKind::corrected, cfg};
    CHECK_THROWS_AS(recover_delays(zero, 1, 1.0), RankDeficientError);
    CHECK_THROWS_AS(recover_delays(zero, 3, 1.0), InsufficientChannelsError);
    CHECK_THROWS_AS(recover_delays(zero, 0, 1.0), ConfigError);
}
