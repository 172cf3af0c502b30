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
#include "subnyquist/dft.hpp"

#include <random>

using namespace subnyquist;

namespace
{

double max_abs_diff(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) { return (a - b).cwiseAbs().maxCoeff(); }

GainSequences random_gains(Eigen::Index K, Eigen::Index n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    GainSequences a(K, n);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            a(k, i) = cplx(g(rng), g(rng));
    return a;
}

/// b[n]: inverse DFT of D(w_j, tau) a(w_j), built without the library's synthesis path.
Eigen::MatrixXcd phased_gains(const GainSequences &a, const DelaySet &tau, const BandConfig &cfg)
{
    const Eigen::Index N = cfg.n_grid;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(a.rows(), N);
    for (Eigen::Index k = 0; k < a.rows(); ++k)
        for (Eigen::Index n = 0; n < N; ++n)
        {
            cplx acc = 0.0;
            for (Eigen::Index j = 0; j < N; ++j)
            {
                cplx aj = 0.0;
                for (Eigen::Index m = 0; m < a.cols(); ++m)
                    aj += a(k, m) * std::exp(-I * two_pi * static_cast<double>(j * m) / static_cast<double>(N));
                acc += aj * std::exp(-I * cfg.omega(j) * tau[static_cast<std::size_t>(k)]) *
                       std::exp(I * two_pi * static_cast<double>(j * n) / static_cast<double>(N));
            }
            out(k, n) = acc / static_cast<double>(N);
        }
    return out;
}

} // namespace

TEST_CASE("build_exact: ideal bank with flat pulse stores (1/T) I", "[correction]")
{
    const BandConfig cfg{4, 1, 0.25, 32};
    const CorrectionBank bank = build_exact(IdealBandpassBank{}, FlatOnBandPulse{}, cfg);
    CHECK(bank.mode == CorrectionMode::exact_grid);
    REQUIRE(bank.inverses.size() == 32);
    for (const auto &inv : bank.inverses)
        CHECK(max_abs_diff(inv, 4.0 * Eigen::MatrixXcd::Identity(4, 4)) < 1e-14);
    CHECK(bank.stable());
}

TEST_CASE("build_exact: residual on random tabulated banks", "[correction]")
{
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    const BandConfig cfg{5, 0, 1.0, 16};
    TabulatedBank tab;
    for (Eigen::Index j = 0; j < cfg.n_grid; ++j)
    {
        Eigen::MatrixXcd v(5, 5);
        for (int l = 0; l < 5; ++l)
            for (int m = 0; m < 5; ++m)
                v(l, m) = cplx(g(rng), g(rng));
        tab.values.push_back(v + 3.0 * Eigen::MatrixXcd::Identity(5, 5));
    }
    const CorrectionBank bank = build_exact(tab, DiracPulse{}, cfg);
    for (Eigen::Index j = 0; j < cfg.n_grid; ++j)
    {
        const Eigen::MatrixXcd w = w_matrix(tab, DiracPulse{}, cfg, j).value;
        CHECK(max_abs_diff(w * bank.inverses[static_cast<std::size_t>(j)], Eigen::MatrixXcd::Identity(5, 5)) < 1e-10);
    }
}

TEST_CASE("build_exact: duplicate delayed channels fail at the first bin", "[correction]")
{
    const BandConfig cfg{3, 0, 1.0, 16};
    try
    {
        build_exact(DelayedLowpassBank{{0.2, 0.2, 0.7}}, DiracPulse{}, cfg);
        FAIL("expected FrontendSingularError");
    }
    catch (const FrontendSingularError &e)
    {
        CHECK(e.bin() == 0);
    }
}

TEST_CASE("apply exact with W = T I divides by T", "[correction]")
{
    std::mt19937_64 rng(32);
    const BandConfig cfg{3, 0, 2.0, 20};
    const MeasurementSet c{random_gains(3, 20, rng), MeasurementKind::raw, cfg};
    const MeasurementSet d = apply(build_exact(IdealBandpassBank{}, FlatOnBandPulse{}, cfg), c);
    CHECK(d.kind == MeasurementKind::corrected);
    CHECK(max_abs_diff(d.channels, c.channels / 2.0) < 1e-14);
}

TEST_CASE("exact correction is the left inverse of the mixing", "[correction][property]")
{
    std::mt19937_64 rng(33);
    struct Case
    {
        BandConfig cfg;
        FilterBankSpec bank;
        PulseSpec pulse;
    };
    const BandConfig b3{3, 0, 1.0, 32};
    const BandConfig bd{4, -1, 1.0, 32};
    const std::vector<Case> cases = {{b3, cosine_tapered_bank(1.0), FlatOnBandPulse{}},
                                     {bd, uniform_delayed_bank(bd), DiracPulse{}},
                                     {bd, DelayedLowpassBank{{0.0, 0.15, 0.5, 0.8}}, FlatOnBandPulse{}}};
    for (const auto &c : cases)
    {
        const DelaySet tau({0.12, 0.47}, 1.0);
        const GainSequences a = random_gains(2, 24, rng);
        const MeasurementSet d = apply(build_exact(c.bank, c.pulse, c.cfg),
                                       synthesize_samples(tau, a, c.bank, c.pulse, c.cfg));
        const Eigen::MatrixXcd n = vandermonde(tau, c.cfg).entries;
        const Eigen::MatrixXcd b = n.completeOrthogonalDecomposition().solve(d.channels);
        CHECK(max_abs_diff(b, phased_gains(a, tau, c.cfg)) < 1e-9);
        CHECK(max_abs_diff(d.channels, n * b) < 1e-9);
    }
}

TEST_CASE("design_fir: ideal bank keeps only the centre tap", "[correction]")
{
    const BandConfig cfg{3, 0, 0.5, 32};
    for (int L : {1, 5, 11})
    {
        const CorrectionBank bank = design_fir(IdealBandpassBank{}, FlatOnBandPulse{}, cfg, L);
        CHECK(bank.mode == CorrectionMode::fir);
        CHECK(bank.length() == L);
        CHECK(bank.group_delay == (L - 1) / 2);
        for (int i = 0; i < L; ++i)
        {
            const Eigen::MatrixXcd expect =
                i == bank.group_delay ? Eigen::MatrixXcd(2.0 * Eigen::MatrixXcd::Identity(3, 3))
                                      : Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(3, 3));
            CHECK(max_abs_diff(bank.taps[static_cast<std::size_t>(i)], expect) < 1e-13);
        }
    }
}

TEST_CASE("design_fir: response error is non-increasing in L", "[correction]")
{
    const BandConfig cfg{3, 0, 1.0, 128};
    const FilterBankSpec bank = cosine_tapered_bank(1.0);
    const CorrectionBank exact = build_exact(bank, FlatOnBandPulse{}, cfg);
    double prev = std::numeric_limits<double>::infinity();
    for (int L : {11, 25, 49, 127})
    {
        const CorrectionBank fir = design_fir(bank, FlatOnBandPulse{}, cfg, L);
        double err = 0.0;
        for (Eigen::Index j = 0; j < cfg.n_grid; ++j)
            err = std::max(err, max_abs_diff(fir.fir_response(cfg.omega(j)), exact.inverses[static_cast<std::size_t>(j)]));
        INFO("L=" << L << " max response error " << err);
        CHECK(err <= prev);
        prev = err;
    }
}

TEST_CASE("FIR output approaches exact output as L grows", "[correction]")
{
    std::mt19937_64 rng(34);
    const BandConfig cfg{3, 0, 1.0, 128};
    const FilterBankSpec bank = cosine_tapered_bank(1.0);
    const DelaySet tau({0.4352, 0.521}, 1.0);
    const MeasurementSet c = synthesize_samples(tau, random_gains(2, 100, rng), bank, FlatOnBandPulse{}, cfg);
    const MeasurementSet exact = apply(build_exact(bank, FlatOnBandPulse{}, cfg), c);
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> devs;
    for (int L : {11, 25, 49, 127})
    {
        const double dev = max_abs_diff(apply(design_fir(bank, FlatOnBandPulse{}, cfg, L), c).channels, exact.channels);
        devs.push_back(dev);
        CHECK(dev <= prev);
        prev = dev;
    }
    CHECK(devs[2] < devs[0]);
}

TEST_CASE("FIR L=11 on the tapered bank still resolves two delays at 30 dB", "[correction]")
{
    std::mt19937_64 rng(35);
    const BandConfig cfg{3, 0, 1.0, 128};
    const FilterBankSpec bank = cosine_tapered_bank(1.0);
    const CorrectionBank fir = design_fir(bank, FlatOnBandPulse{}, cfg, 11);
    const DelaySet tau({0.4352, 0.521}, 1.0);
    double mse = 0.0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t)
    {
        GainSequences a(2, 100);
        a.row(0) = jakes_gains(0.05, 1.0, 100, 1.0, 100 + static_cast<std::uint64_t>(t)).transpose();
        a.row(1) = jakes_gains(0.05, 1.0, 100, 1.0, 200 + static_cast<std::uint64_t>(t)).transpose();
        const MeasurementSet c = add_noise(synthesize_samples(tau, a, bank, FlatOnBandPulse{}, cfg), 30.0,
                                           300 + static_cast<std::uint64_t>(t));
        const DelayEstimate est = recover_delays(apply(fir, c), 2, 1.0, RecoveryOptions{1e-2, EspritVariant::tls});
        for (std::size_t k = 0; k < 2; ++k)
            mse += std::pow(est.delays[k] - tau[k], 2) / 2.0;
    }
    CHECK(mse / trials < 1e-3);
}

TEST_CASE("apply is linear and cyclic-shift equivariant in both modes", "[correction][property]")
{
    std::mt19937_64 rng(36);
    const BandConfig cfg{3, 0, 1.0, 64};
    const FilterBankSpec bank = cosine_tapered_bank(1.0);
    for (const CorrectionBank &corr : {build_exact(bank, FlatOnBandPulse{}, cfg), design_fir(bank, FlatOnBandPulse{}, cfg, 25)})
    {
        const MeasurementSet x{random_gains(3, 64, rng), MeasurementKind::raw, cfg};
        const MeasurementSet y{random_gains(3, 64, rng), MeasurementKind::raw, cfg};
        const MeasurementSet sum{x.channels + cplx(0.5, 2.0) * y.channels, MeasurementKind::raw, cfg};
        CHECK(max_abs_diff(apply(corr, sum).channels,
                           apply(corr, x).channels + cplx(0.5, 2.0) * apply(corr, y).channels) < 1e-12);

        const int shift = 9;
        MeasurementSet xs = x;
        for (Eigen::Index n = 0; n < 64; ++n)
            xs.channels.col((n + shift) % 64) = x.channels.col(n);
        const Eigen::MatrixXcd dx = apply(corr, x).channels, dxs = apply(corr, xs).channels;
        for (Eigen::Index n = 0; n < 64; ++n)
            CHECK(max_abs_diff(dxs.col((n + shift) % 64), dx.col(n)) < 1e-12);
    }
}

TEST_CASE("design_fir options and errors", "[correction]")
{
    const BandConfig cfg{3, 0, 1.0, 64};
    const FilterBankSpec bank = cosine_tapered_bank(1.0);
    CHECK_THROWS_AS(design_fir(bank, FlatOnBandPulse{}, cfg, 10), ConfigError);
    CHECK_THROWS_AS(design_fir(bank, FlatOnBandPulse{}, cfg, 0), ConfigError);
    CHECK_THROWS_AS(design_fir(bank, FlatOnBandPulse{}, cfg, 65), ConfigError);

    const CorrectionBank rect = design_fir(bank, FlatOnBandPulse{}, cfg, 11);
    const CorrectionBank hann = design_fir(bank, FlatOnBandPulse{}, cfg, 11, FirWindow::raised_cosine);
    CHECK(max_abs_diff(rect.taps[5], hann.taps[5]) < 1e-15);
    CHECK(hann.taps[0].cwiseAbs().maxCoeff() < rect.taps[0].cwiseAbs().maxCoeff());

    const MeasurementSet wrong{Eigen::MatrixXcd::Zero(2, 64), MeasurementKind::raw, cfg};
    CHECK_THROWS_AS(apply(rect, wrong), ConfigError);
    const MeasurementSet short_input{Eigen::MatrixXcd::Zero(3, 32), MeasurementKind::raw, cfg};
    CHECK_THROWS_AS(apply(build_exact(bank, FlatOnBandPulse{}, cfg), short_input), ConfigError);
}
