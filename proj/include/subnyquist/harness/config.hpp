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

#ifndef SUBNYQUIST_HARNESS_CONFIG_HPP
#define SUBNYQUIST_HARNESS_CONFIG_HPP

#include "subnyquist/correction.hpp"
#include "subnyquist/delay_recovery.hpp"
#include "subnyquist/errors.hpp"
#include "subnyquist/frontend.hpp"
#include "subnyquist/model.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace subnyquist::harness
{

using json = nlohmann::json;

enum class Scenario
{
    channel_est,
    mse_vs_snr,
    mse_vs_p,
    mse_vs_nvec,
    mse_vs_taps,
    single_run
};

inline const std::vector<std::pair<Scenario, std::string>> &scenario_names()
{
    static const std::vector<std::pair<Scenario, std::string>> names = {
        {Scenario::channel_est, "channel-est"}, {Scenario::mse_vs_snr, "mse-vs-snr"},
        {Scenario::mse_vs_p, "mse-vs-p"},       {Scenario::mse_vs_nvec, "mse-vs-nvec"},
        {Scenario::mse_vs_taps, "mse-vs-taps"}, {Scenario::single_run, "single-run"}};
    return names;
}

inline std::string to_string(Scenario s)
{
    for (const auto &[id, name] : scenario_names())
        if (id == s)
            return name;
    return "unknown";
}

inline Scenario parse_scenario(const std::string &name)
{
    for (const auto &[id, n] : scenario_names())
        if (n == name)
            return id;
    throw ConfigError("unknown scenario '" + name + "'");
}

/// Delays either fixed or drawn uniformly per trial; both in units of T.
struct DelaySpec
{
    enum class Mode
    {
        fixed,
        uniform_random
    };
    Mode mode = Mode::fixed;
    std::vector<double> values;
    /// Redraw random delay sets with any pair closer than this (units of T).
    double min_separation = 1.0 / 500.0;
};

/// One experiment. Field names match the JSON keys. Frequencies f_d are in units of 1/T;
/// snr_db may hold +inf (JSON "inf"); a taps entry of 0 selects the exact correction bank.
struct ExperimentConfig
{
    Scenario scenario = Scenario::single_run;
    std::size_t K = 2;
    int p = 4;
    int gamma = 0;
    double T = 1.0;
    int N_f = 128;
    int N_sym = 100;
    std::vector<double> f_d{0.05};
    std::vector<double> snr_db{30.0};
    std::vector<int> taps{0};
    std::vector<int> p_grid{4};
    std::vector<int> nvec{128};
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    std::string bank = "ideal-bandpass";
    std::string pulse = "flat";
    DelaySpec delay_spec{DelaySpec::Mode::fixed, {0.4352, 0.521}, 1.0 / 500.0};
    std::string power_profile = "unit";
    std::string power_normalization = "expectation";
    std::string esprit = "tls";
    double rank_tol = 1e-2;
    int jakes_oscillators = 32;
    std::string fir_window = "rectangular";

    BandConfig band(int channels) const { return BandConfig{channels, gamma, T, N_f}; }

    void validate() const
    {
        auto fail = [](const std::string &m) { throw ConfigError("config: " + m); };
        if (trials < 1)
            fail("trials must be >= 1");
        if (K < 1)
            fail("K must be >= 1");
        if (!(T > 0.0))
            fail("T must be positive");
        if (N_f < 1 || N_sym < 1 || N_sym > N_f)
            fail("need 1 <= N_sym <= N_f");
        if (f_d.empty() || snr_db.empty() || taps.empty() || p_grid.empty() || nvec.empty())
            fail("all grids must be nonempty");
        for (double f : f_d)
            if (!(f >= 0.0) || !std::isfinite(f))
                fail("f_d entries must be finite and >= 0");
        for (double s : snr_db)
            if (std::isnan(s) || (std::isinf(s) && s < 0.0))
                fail("snr_db entries must be finite or +inf");
        for (int L : taps)
            if (L < 0 || (L > 0 && (L % 2 == 0 || L > N_f)))
                fail("taps must be 0 (exact) or odd and <= N_f");
        for (int n : nvec)
            if (n < 1 || n > N_f)
                fail("nvec entries must lie in [1, N_f]");
        std::vector<int> ps = p_grid;
        ps.push_back(p);
        for (int q : ps)
            if (q < static_cast<int>(K) + 1)
                fail("p must be >= K+1");
        if (bank != "ideal-bandpass" && bank != "delayed-lowpass" && bank != "cosine-tapered")
            fail("bank must be ideal-bandpass, delayed-lowpass or cosine-tapered");
        if (pulse != "flat" && pulse != "dirac")
            fail("pulse must be flat or dirac");
        if (power_profile != "unit" && power_profile != "decreasing" && power_profile != "increasing")
            fail("power_profile must be unit, decreasing or increasing");
        if (power_normalization != "expectation" && power_normalization != "per-realization")
            fail("power_normalization must be expectation or per-realization");
        if (esprit != "tls" && esprit != "ls")
            fail("esprit must be tls or ls");
        if (!(rank_tol > 0.0 && rank_tol < 1.0))
            fail("rank_tol must lie in (0,1)");
        if (jakes_oscillators < 1)
            fail("jakes_oscillators must be >= 1");
        if (fir_window != "rectangular" && fir_window != "raised-cosine")
            fail("fir_window must be rectangular or raised-cosine");
        if (delay_spec.mode == DelaySpec::Mode::fixed)
        {
            if (delay_spec.values.size() != K)
                fail("fixed delay list must hold K values");
            std::set<double> seen;
            for (double t : delay_spec.values)
            {
                if (!(t >= 0.0 && t < 1.0))
                    fail("fixed delays must lie in [0,1) (units of T)");
                if (!seen.insert(t).second)
                    fail("fixed delays must be distinct");
            }
        }
        else if (!(delay_spec.min_separation >= 0.0) ||
                 delay_spec.min_separation * static_cast<double>(K) >= 1.0)
        {
            fail("min_separation must satisfy 0 <= K*min_separation < 1");
        }
    }

    FilterBankSpec filter_bank(const BandConfig &cfg) const
    {
        if (bank == "delayed-lowpass")
            return uniform_delayed_bank(cfg);
        if (bank == "cosine-tapered")
            return cosine_tapered_bank(cfg.T);
        return IdealBandpassBank{};
    }

    PulseSpec pulse_spec() const
    {
        if (pulse == "dirac")
            return DiracPulse{};
        return FlatOnBandPulse{};
    }

    PowerProfile profile() const
    {
        return power_profile == "increasing" ? PowerProfile::increasing : PowerProfile::decreasing;
    }

    std::vector<double> powers() const
    {
        if (power_profile == "unit")
            return std::vector<double>(K, 1.0);
        return path_powers(K, profile());
    }

    EspritVariant esprit_variant() const { return esprit == "ls" ? EspritVariant::ls : EspritVariant::tls; }

    FirWindow window() const { return fir_window == "raised-cosine" ? FirWindow::raised_cosine : FirWindow::rectangular; }
};

/// Scenario presets reproducing the published experiment setups.
inline ExperimentConfig default_config(Scenario s)
{
    ExperimentConfig c;
    c.scenario = s;
    c.trials = 1000;
    switch (s)
    {
    case Scenario::channel_est:
        c.K = 4;
        c.p = 5;
        c.p_grid = {5};
        c.snr_db = {15.0};
        c.delay_spec = {DelaySpec::Mode::uniform_random, {}, 1.0 / 500.0};
        c.power_profile = "decreasing";
        break;
    case Scenario::mse_vs_snr:
        c.snr_db = {5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
        break;
    case Scenario::mse_vs_p:
        c.snr_db = {10.0};
        c.p_grid = {3, 4, 5, 6, 7, 8};
        break;
    case Scenario::mse_vs_nvec:
        c.snr_db = {20.0};
        c.f_d = {0.05, 0.1};
        c.nvec = {10, 25, 50, 75, 100};
        break;
    case Scenario::mse_vs_taps:
        c.p = 3;
        c.p_grid = {3};
        c.bank = "cosine-tapered";
        c.snr_db = {10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
        c.taps = {0, 11, 25, 49};
        break;
    case Scenario::single_run:
        c.trials = 1;
        break;
    }
    c.nvec = s == Scenario::mse_vs_nvec ? c.nvec : std::vector<int>{c.N_f};
    return c;
}

// ---- JSON ------------------------------------------------------------------

namespace detail
{
inline double snr_from_json(const json &v)
{
    if (v.is_string())
    {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "Infinity")
            return std::numeric_limits<double>::infinity();
        throw ConfigError("config: snr_db string entries must be \"inf\"");
    }
    if (!v.is_number())
        throw ConfigError("config: snr_db entries must be numbers or \"inf\"");
    return v.get<double>();
}

inline json snr_to_json(double s)
{
    if (std::isinf(s))
        return "inf";
    return s;
}
} // namespace detail

inline ExperimentConfig config_from_json(const json &j, std::optional<Scenario> scenario_override = std::nullopt)
{
    if (!j.is_object())
        throw ConfigError("config: top level must be a JSON object");
    Scenario s = scenario_override.value_or(Scenario::single_run);
    if (j.contains("scenario"))
    {
        const Scenario named = parse_scenario(j.at("scenario").get<std::string>());
        if (scenario_override && named != *scenario_override)
            throw ConfigError("config: scenario '" + to_string(named) + "' conflicts with the requested '" +
                              to_string(*scenario_override) + "'");
        s = named;
    }
    ExperimentConfig c = default_config(s);

    static const std::set<std::string> known = {
        "scenario", "K",       "p",           "gamma",         "T",     "N_f",           "N_sym",
        "f_d",      "snr_db",  "taps",        "p_grid",        "nvec",  "trials",        "seed",
        "bank",     "pulse",   "delay_spec",  "power_profile", "esprit", "rank_tol",     "jakes_oscillators",
        "fir_window", "power_normalization"};
    for (const auto &item : j.items())
        if (!known.contains(item.key()))
            throw ConfigError("config: unknown key '" + item.key() + "'");

    try
    {
        if (j.contains("K"))
            c.K = j.at("K").get<std::size_t>();
        if (j.contains("p"))
        {
            c.p = j.at("p").get<int>();
            if (!j.contains("p_grid"))
                c.p_grid = {c.p};
        }
        if (j.contains("gamma"))
            c.gamma = j.at("gamma").get<int>();
        if (j.contains("T"))
            c.T = j.at("T").get<double>();
        if (j.contains("N_f"))
        {
            c.N_f = j.at("N_f").get<int>();
            if (!j.contains("nvec") && c.scenario != Scenario::mse_vs_nvec)
                c.nvec = {c.N_f};
        }
        if (j.contains("N_sym"))
            c.N_sym = j.at("N_sym").get<int>();
        if (j.contains("f_d"))
            c.f_d = j.at("f_d").get<std::vector<double>>();
        if (j.contains("snr_db"))
        {
            c.snr_db.clear();
            for (const auto &v : j.at("snr_db"))
                c.snr_db.push_back(detail::snr_from_json(v));
        }
        if (j.contains("taps"))
            c.taps = j.at("taps").get<std::vector<int>>();
        if (j.contains("p_grid"))
            c.p_grid = j.at("p_grid").get<std::vector<int>>();
        if (j.contains("nvec"))
            c.nvec = j.at("nvec").get<std::vector<int>>();
        if (j.contains("trials"))
            c.trials = j.at("trials").get<std::size_t>();
        if (j.contains("seed"))
            c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("bank"))
            c.bank = j.at("bank").get<std::string>();
        if (j.contains("pulse"))
            c.pulse = j.at("pulse").get<std::string>();
        if (j.contains("power_profile"))
            c.power_profile = j.at("power_profile").get<std::string>();
        if (j.contains("power_normalization"))
            c.power_normalization = j.at("power_normalization").get<std::string>();
        if (j.contains("esprit"))
            c.esprit = j.at("esprit").get<std::string>();
        if (j.contains("rank_tol"))
            c.rank_tol = j.at("rank_tol").get<double>();
        if (j.contains("jakes_oscillators"))
            c.jakes_oscillators = j.at("jakes_oscillators").get<int>();
        if (j.contains("fir_window"))
            c.fir_window = j.at("fir_window").get<std::string>();
        if (j.contains("delay_spec"))
        {
            const json &d = j.at("delay_spec");
            const std::string mode = d.at("mode").get<std::string>();
            if (mode == "fixed")
            {
                c.delay_spec.mode = DelaySpec::Mode::fixed;
                c.delay_spec.values = d.at("values").get<std::vector<double>>();
            }
            else if (mode == "uniform-random")
            {
                c.delay_spec.mode = DelaySpec::Mode::uniform_random;
                c.delay_spec.values.clear();
            }
            else
            {
                throw ConfigError("config: delay_spec.mode must be fixed or uniform-random");
            }
            if (d.contains("min_separation"))
                c.delay_spec.min_separation = d.at("min_separation").get<double>();
        }
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline json config_to_json(const ExperimentConfig &c)
{
    json snr = json::array();
    for (double s : c.snr_db)
        snr.push_back(detail::snr_to_json(s));
    json delay = {{"mode", c.delay_spec.mode == DelaySpec::Mode::fixed ? "fixed" : "uniform-random"},
                  {"min_separation", c.delay_spec.min_separation}};
    if (c.delay_spec.mode == DelaySpec::Mode::fixed)
        delay["values"] = c.delay_spec.values;
    return json{{"scenario", to_string(c.scenario)},
                {"K", c.K},
                {"p", c.p},
                {"gamma", c.gamma},
                {"T", c.T},
                {"N_f", c.N_f},
                {"N_sym", c.N_sym},
                {"f_d", c.f_d},
                {"snr_db", snr},
                {"taps", c.taps},
                {"p_grid", c.p_grid},
                {"nvec", c.nvec},
                {"trials", c.trials},
                {"seed", c.seed},
                {"bank", c.bank},
                {"pulse", c.pulse},
                {"delay_spec", delay},
                {"power_profile", c.power_profile},
                {"power_normalization", c.power_normalization},
                {"esprit", c.esprit},
                {"rank_tol", c.rank_tol},
                {"jakes_oscillators", c.jakes_oscillators},
                {"fir_window", c.fir_window}};
}

} // namespace subnyquist::harness

#endif // SUBNYQUIST_HARNESS_CONFIG_HPP
