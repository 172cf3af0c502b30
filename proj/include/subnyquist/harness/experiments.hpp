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

#ifndef SUBNYQUIST_HARNESS_EXPERIMENTS_HPP
#define SUBNYQUIST_HARNESS_EXPERIMENTS_HPP

#include "subnyquist/correction.hpp"
#include "subnyquist/delay_recovery.hpp"
#include "subnyquist/frontend.hpp"
#include "subnyquist/gain_recovery.hpp"
#include "subnyquist/harness/config.hpp"
#include "subnyquist/harness/metrics.hpp"
#include "subnyquist/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace subnyquist::harness
{

inline constexpr const char *tool_version = "1.0.0";

// ---- CSV -------------------------------------------------------------------

inline std::string format_number(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvTable
{
    std::string name; ///< file name, e.g. "mse_vs_snr.csv"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    std::string to_string() const
    {
        std::ostringstream os;
        auto line = [&os](const std::vector<std::string> &cells) {
            for (std::size_t i = 0; i < cells.size(); ++i)
                os << (i ? "," : "") << cells[i];
            os << '\n';
        };
        line(header);
        for (const auto &r : rows)
            line(r);
        return os.str();
    }

    /// Column index by name.
    std::size_t column(const std::string &h) const
    {
        const auto it = std::find(header.begin(), header.end(), h);
        if (it == header.end())
            throw ConfigError("CsvTable: no column " + h);
        return static_cast<std::size_t>(it - header.begin());
    }

    double value(std::size_t row, const std::string &h) const { return std::stod(rows.at(row).at(column(h))); }
};

struct RunOutput
{
    std::vector<CsvTable> tables;
    /// Additional files (name, contents), e.g. the dataset written by single-run.
    std::vector<std::pair<std::string, std::string>> files;

    const CsvTable &table(const std::string &name) const
    {
        for (const auto &t : tables)
            if (t.name == name)
                return t;
        throw ConfigError("RunOutput: no table " + name);
    }
};

// ---- Parallel trial engine -------------------------------------------------

/// Runs fn(i) for i in [0,n) on `threads` workers. The first exception (lowest index) is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn &&fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::exception_ptr> errors(n);
    if (threads == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
                break;
            }
        }
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        errors[i] = std::current_exception();
                        failed = true;
                    }
                }
            });
        for (auto &t : pool)
            t.join();
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

// ---- Trial simulation ------------------------------------------------------

/// Ground truth of one trial. Rows of `alpha`/`gains` follow the sorted delay order;
/// path_index[i] is the configured path (power-profile index) of sorted delay i.
struct TrialTruth
{
    DelaySet tau;
    std::vector<std::size_t> path_index;
    Eigen::MatrixXcd alpha;   ///< K x N_sym channel coefficients
    Eigen::VectorXcd symbols; ///< N_sym known symbols (all ones unless the scenario modulates)
    GainSequences gains;      ///< a_k[n] = alpha_k[n] * symbols[n]
};

namespace streams
{
inline constexpr std::uint64_t delays = 1;
inline constexpr std::uint64_t symbols = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t gains = 16; // + path index
} // namespace streams

inline std::vector<double> draw_delays(const ExperimentConfig &c, std::size_t trial)
{
    if (c.delay_spec.mode == DelaySpec::Mode::fixed)
    {
        std::vector<double> t;
        for (double v : c.delay_spec.values)
            t.push_back(v * c.T);
        return t;
    }
    std::mt19937_64 rng(trial_seed(c.seed, trial, streams::delays));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (;;)
    {
        std::vector<double> t(c.K);
        for (auto &v : t)
            v = uni(rng) * c.T;
        bool ok = true;
        for (std::size_t i = 0; i < t.size() && ok; ++i)
            for (std::size_t j = i + 1; j < t.size() && ok; ++j)
                ok = circular_distance(t[i], t[j], c.T) >= c.delay_spec.min_separation * c.T;
        if (ok)
            return t;
    }
}

inline TrialTruth draw_truth(const ExperimentConfig &c, std::size_t trial, double f_d, bool modulate)
{
    const std::vector<double> raw = draw_delays(c, trial);
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });

    TrialTruth t;
    t.tau = DelaySet(raw, c.T);
    t.path_index = order;

    const std::vector<double> powers = c.powers();
    JakesOptions jopts;
    jopts.oscillators = c.jakes_oscillators;
    jopts.normalize_per_realization = c.power_normalization == "per-realization";

    t.symbols = Eigen::VectorXcd::Ones(c.N_sym);
    if (modulate)
    {
        std::mt19937_64 rng(trial_seed(c.seed, trial, streams::symbols));
        std::bernoulli_distribution bit(0.5);
        for (Eigen::Index n = 0; n < c.N_sym; ++n)
            t.symbols(n) = bit(rng) ? 1.0 : -1.0;
    }

    t.alpha.resize(static_cast<Eigen::Index>(c.K), c.N_sym);
    for (std::size_t i = 0; i < c.K; ++i)
    {
        const std::size_t path = order[i];
        t.alpha.row(static_cast<Eigen::Index>(i)) =
            jakes_gains(f_d / c.T, c.T, c.N_sym, powers[path], trial_seed(c.seed, trial, streams::gains + path), jopts)
                .transpose();
    }
    t.gains = t.alpha * t.symbols.asDiagonal();
    return t;
}

/// Correction banks shared by all trials, keyed by (channel count, taps); taps 0 = exact.
class CorrectionCache
{
public:
    explicit CorrectionCache(const ExperimentConfig &c) : cfg_(c) {}

    const CorrectionBank &get(int p, int taps)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(p, taps);
        auto it = banks_.find(key);
        if (it == banks_.end())
        {
            const BandConfig band = cfg_.band(p);
            CorrectionBank bank = taps == 0 ? build_exact(cfg_.filter_bank(band), cfg_.pulse_spec(), band)
                                            : design_fir(cfg_.filter_bank(band), cfg_.pulse_spec(), band, taps,
                                                         cfg_.window());
            it = banks_.emplace(key, std::move(bank)).first;
        }
        return it->second;
    }

private:
    const ExperimentConfig &cfg_;
    std::mutex mutex_;
    std::map<std::pair<int, int>, CorrectionBank> banks_;
};

struct TrialResult
{
    std::vector<double> true_delays;
    std::vector<double> est_delays;
    std::vector<double> squared_errors;
    double delay_mse = 0.0;
    bool smoothed = false;
    DelayMatch match;
    std::optional<RecoveredChannel> channel;
    std::uint64_t seed = 0;
};

struct TrialPoint
{
    int p = 4;
    double snr_db = 30.0;
    int nvec = 0; ///< 0 = all vectors
    int taps = 0; ///< 0 = exact correction
};

/// Noisy raw samples for one trial at one grid point.
inline MeasurementSet trial_samples(const ExperimentConfig &c, const TrialTruth &truth, const TrialPoint &pt,
                                    std::size_t trial)
{
    const BandConfig band = c.band(pt.p);
    const MeasurementSet clean =
        synthesize_samples(truth.tau, truth.gains, c.filter_bank(band), c.pulse_spec(), band);
    return add_noise(clean, pt.snr_db, trial_seed(c.seed, trial, streams::noise));
}

inline TrialResult estimate_trial(const ExperimentConfig &c, const TrialTruth &truth, const MeasurementSet &raw,
                                  const TrialPoint &pt, CorrectionCache &cache, bool want_gains, std::size_t trial)
{
    const BandConfig band = c.band(pt.p);
    const MeasurementSet d = apply(cache.get(pt.p, pt.taps), raw);
    const MeasurementSet used = pt.nvec > 0 ? d.first(pt.nvec) : d;
    RecoveryOptions opts;
    opts.rel_tol = std::isinf(pt.snr_db) ? 1e-6 : c.rank_tol;
    opts.variant = c.esprit_variant();
    const DelayEstimate est = recover_delays(used, c.K, c.T, opts);

    TrialResult r;
    r.seed = trial_seed(c.seed, trial);
    r.true_delays = truth.tau.values();
    r.est_delays = est.delays.values();
    r.smoothed = est.smoothed;
    r.match = match_delays(est.delays, truth.tau, c.T);
    r.squared_errors = r.match.squared_errors;
    r.delay_mse = r.match.mean_squared_error;
    if (want_gains)
        r.channel = recover_channel(d, est.delays, band, truth.symbols);
    return r;
}

// ---- Scenarios -------------------------------------------------------------

namespace detail
{
/// Sweep over grid points; each trial job evaluates every point with common random numbers.
inline std::vector<std::vector<double>> sweep(const ExperimentConfig &c, double f_d, const std::vector<TrialPoint> &pts,
                                              unsigned threads)
{
    CorrectionCache cache(c);
    std::vector<std::vector<double>> err(pts.size(), std::vector<double>(c.trials));
    parallel_for(c.trials, threads, [&](std::size_t trial) {
        const TrialTruth truth = draw_truth(c, trial, f_d, false);
        std::map<std::pair<int, double>, MeasurementSet> raw_cache;
        for (std::size_t g = 0; g < pts.size(); ++g)
        {
            const auto key = std::make_pair(pts[g].p, pts[g].snr_db);
            auto it = raw_cache.find(key);
            if (it == raw_cache.end())
                it = raw_cache.emplace(key, trial_samples(c, truth, pts[g], trial)).first;
            err[g][trial] = estimate_trial(c, truth, it->second, pts[g], cache, false, trial).delay_mse;
        }
    });
    return err;
}

inline std::vector<std::string> stat_cells(const ExperimentConfig &c, const std::vector<double> &errors)
{
    const MeanEstimate m = mean_and_se(errors);
    return {std::to_string(c.trials), format_number(m.mean), format_number(m.standard_error)};
}

inline void append(std::vector<std::string> &row, const std::vector<std::string> &more)
{
    row.insert(row.end(), more.begin(), more.end());
}
} // namespace detail

inline RunOutput run_mse_vs_snr(const ExperimentConfig &c, unsigned threads = 1)
{
    RunOutput out;
    CsvTable t{"mse_vs_snr.csv", {"f_d", "snr_db", "p", "trials", "mse", "se"}, {}};
    std::vector<TrialPoint> pts;
    for (double s : c.snr_db)
        pts.push_back({c.p, s, 0, c.taps.front()});
    for (double f : c.f_d)
    {
        const auto err = detail::sweep(c, f, pts, threads);
        for (std::size_t g = 0; g < pts.size(); ++g)
        {
            std::vector<std::string> row{format_number(f), format_number(pts[g].snr_db), std::to_string(pts[g].p)};
            detail::append(row, detail::stat_cells(c, err[g]));
            t.add_row(std::move(row));
        }
    }
    out.tables.push_back(std::move(t));
    return out;
}

inline RunOutput run_mse_vs_p(const ExperimentConfig &c, unsigned threads = 1)
{
    RunOutput out;
    CsvTable t{"mse_vs_p.csv", {"f_d", "p", "snr_db", "trials", "mse", "se"}, {}};
    std::vector<TrialPoint> pts;
    for (double s : c.snr_db)
        for (int p : c.p_grid)
            pts.push_back({p, s, 0, c.taps.front()});
    for (double f : c.f_d)
    {
        const auto err = detail::sweep(c, f, pts, threads);
        for (std::size_t g = 0; g < pts.size(); ++g)
        {
            std::vector<std::string> row{format_number(f), std::to_string(pts[g].p), format_number(pts[g].snr_db)};
            detail::append(row, detail::stat_cells(c, err[g]));
            t.add_row(std::move(row));
        }
    }
    out.tables.push_back(std::move(t));
    return out;
}

inline RunOutput run_mse_vs_nvec(const ExperimentConfig &c, unsigned threads = 1)
{
    RunOutput out;
    CsvTable t{"mse_vs_nvec.csv", {"f_d", "nvec", "snr_db", "p", "trials", "mse", "se"}, {}};
    std::vector<TrialPoint> pts;
    for (double s : c.snr_db)
        for (int n : c.nvec)
            pts.push_back({c.p, s, n, c.taps.front()});
    for (double f : c.f_d)
    {
        const auto err = detail::sweep(c, f, pts, threads);
        for (std::size_t g = 0; g < pts.size(); ++g)
        {
            std::vector<std::string> row{format_number(f), std::to_string(pts[g].nvec),
                                         format_number(pts[g].snr_db), std::to_string(pts[g].p)};
            detail::append(row, detail::stat_cells(c, err[g]));
            t.add_row(std::move(row));
        }
    }
    out.tables.push_back(std::move(t));
    return out;
}

inline RunOutput run_mse_vs_taps(const ExperimentConfig &c, unsigned threads = 1)
{
    RunOutput out;
    CsvTable t{"mse_vs_taps.csv", {"f_d", "taps", "snr_db", "p", "trials", "mse", "se"}, {}};
    std::vector<TrialPoint> pts;
    for (int L : c.taps)
        for (double s : c.snr_db)
            pts.push_back({c.p, s, 0, L});
    for (double f : c.f_d)
    {
        const auto err = detail::sweep(c, f, pts, threads);
        for (std::size_t g = 0; g < pts.size(); ++g)
        {
            std::vector<std::string> row{format_number(f), std::to_string(pts[g].taps),
                                         format_number(pts[g].snr_db), std::to_string(pts[g].p)};
            detail::append(row, detail::stat_cells(c, err[g]));
            t.add_row(std::move(row));
        }
    }
    out.tables.push_back(std::move(t));
    return out;
}

/// Time-varying channel estimation with known BPSK symbols: average path energies,
/// first-path gain track of trial 0, and the delay MSE summary.
inline RunOutput run_channel_estimation(const ExperimentConfig &c, unsigned threads = 1)
{
    const double f_d = c.f_d.front();
    const TrialPoint pt{c.p, c.snr_db.front(), 0, c.taps.front()};
    CorrectionCache cache(c);
    std::vector<TrialResult> results(c.trials);
    std::vector<TrialTruth> truths(c.trials);
    parallel_for(c.trials, threads, [&](std::size_t trial) {
        TrialTruth truth = draw_truth(c, trial, f_d, true);
        const MeasurementSet raw = trial_samples(c, truth, pt, trial);
        results[trial] = estimate_trial(c, truth, raw, pt, cache, true, trial);
        truths[trial] = std::move(truth);
    });

    const std::size_t K = c.K;
    std::vector<std::vector<double>> true_e(K, std::vector<double>(c.trials));
    std::vector<std::vector<double>> est_e(K, std::vector<double>(c.trials));
    std::vector<double> mse(c.trials), smoothed(c.trials);
    for (std::size_t trial = 0; trial < c.trials; ++trial)
    {
        const TrialTruth &truth = truths[trial];
        const TrialResult &r = results[trial];
        mse[trial] = r.delay_mse;
        smoothed[trial] = r.smoothed ? 1.0 : 0.0;
        for (std::size_t i = 0; i < K; ++i)
        {
            const std::size_t path = truth.path_index[i];
            true_e[path][trial] = truth.alpha.row(static_cast<Eigen::Index>(i)).squaredNorm() / c.N_sym;
            // estimate i is matched to sorted truth r.match.truth_of[i]
            const std::size_t matched_path = truth.path_index[r.match.truth_of[i]];
            est_e[matched_path][trial] =
                r.channel->channel_coeffs->row(static_cast<Eigen::Index>(i)).squaredNorm() / c.N_sym;
        }
    }

    RunOutput out;
    CsvTable pdp{"channel_est_pdp.csv",
                 {"path", "configured_power", "true_energy", "true_energy_se", "est_energy", "est_energy_se",
                  "est_energy_median"},
                 {}};
    const std::vector<double> powers = c.powers();
    for (std::size_t k = 0; k < K; ++k)
    {
        const MeanEstimate te = mean_and_se(true_e[k]);
        const MeanEstimate ee = mean_and_se(est_e[k]);
        pdp.add_row({std::to_string(k + 1), format_number(powers[k]), format_number(te.mean),
                     format_number(te.standard_error), format_number(ee.mean), format_number(ee.standard_error),
                     format_number(median(est_e[k]))});
    }
    out.tables.push_back(std::move(pdp));

    // First (strongest configured) path of trial 0.
    CsvTable track{"channel_est_first_tap.csv", {"n", "true_abs", "est_abs"}, {}};
    {
        const TrialTruth &truth = truths[0];
        const TrialResult &r = results[0];
        const auto sorted_true = static_cast<Eigen::Index>(
            std::find(truth.path_index.begin(), truth.path_index.end(), std::size_t{0}) - truth.path_index.begin());
        const auto est_row = static_cast<Eigen::Index>(
            std::find(r.match.truth_of.begin(), r.match.truth_of.end(), static_cast<std::size_t>(sorted_true)) -
            r.match.truth_of.begin());
        for (Eigen::Index n = 0; n < c.N_sym; ++n)
            track.add_row({std::to_string(n), format_number(std::abs(truth.alpha(sorted_true, n))),
                           format_number(std::abs((*r.channel->channel_coeffs)(est_row, n)))});
    }
    out.tables.push_back(std::move(track));

    CsvTable summary{"channel_est_summary.csv",
                     {"K", "p", "snr_db", "f_d", "trials", "delay_mse", "delay_mse_se", "smoothed_fraction"},
                     {}};
    const MeanEstimate m = mean_and_se(mse);
    summary.add_row({std::to_string(K), std::to_string(c.p), format_number(pt.snr_db), format_number(f_d),
                     std::to_string(c.trials), format_number(m.mean), format_number(m.standard_error),
                     format_number(mean_and_se(smoothed).mean)});
    out.tables.push_back(std::move(summary));
    return out;
}

// ---- Datasets --------------------------------------------------------------

inline json complex_rows_to_json(const Eigen::MatrixXcd &m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
        std::vector<double> re, im;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
        {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
        rows.push_back({{"re", re}, {"im", im}});
    }
    return rows;
}

inline Eigen::MatrixXcd complex_rows_from_json(const json &rows)
{
    if (!rows.is_array() || rows.empty())
        throw ConfigError("dataset: channels must be a nonempty array");
    const std::size_t n = rows.front().at("re").size();
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        const auto re = rows[r].at("re").get<std::vector<double>>();
        const auto im = rows[r].at("im").get<std::vector<double>>();
        if (re.size() != n || im.size() != n)
            throw ConfigError("dataset: all channels must share one length");
        for (std::size_t c = 0; c < n; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cplx(re[c], im[c]);
    }
    return m;
}

/// Serializes raw samples plus the receiver-side settings needed to estimate from them.
inline json make_dataset(const ExperimentConfig &c, const MeasurementSet &raw, const Eigen::VectorXcd &symbols)
{
    return json{{"format", "subnyquist-dataset"},
                {"version", 1},
                {"K", c.K},
                {"T", c.T},
                {"gamma", c.gamma},
                {"kind", raw.kind == MeasurementKind::raw ? "raw" : "corrected"},
                {"bank", c.bank},
                {"pulse", c.pulse},
                {"taps", c.taps.front()},
                {"rank_tol", c.rank_tol},
                {"esprit", c.esprit},
                {"channels", complex_rows_to_json(raw.channels)},
                {"symbols", complex_rows_to_json(symbols.transpose())[0]}};
}

/// Delay and gain estimation from a dataset document (see make_dataset).
inline RunOutput estimate_dataset(const json &ds)
{
    ExperimentConfig c = default_config(Scenario::single_run);
    MeasurementSet m;
    std::optional<Eigen::VectorXcd> symbols;
    try
    {
        c.K = ds.at("K").get<std::size_t>();
        c.T = ds.value("T", 1.0);
        c.gamma = ds.value("gamma", 0);
        c.bank = ds.value("bank", std::string("ideal-bandpass"));
        c.pulse = ds.value("pulse", std::string("flat"));
        c.taps = {ds.value("taps", 0)};
        c.rank_tol = ds.value("rank_tol", 1e-2);
        c.esprit = ds.value("esprit", std::string("tls"));
        m.channels = complex_rows_from_json(ds.at("channels"));
        const std::string kind = ds.value("kind", std::string("raw"));
        if (kind != "raw" && kind != "corrected")
            throw ConfigError("dataset: kind must be raw or corrected");
        m.kind = kind == "raw" ? MeasurementKind::raw : MeasurementKind::corrected;
        if (ds.contains("symbols"))
        {
            json wrapped = json::array({ds.at("symbols")});
            symbols = complex_rows_from_json(wrapped).row(0).transpose();
        }
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("dataset: ") + e.what());
    }
    c.p = static_cast<int>(m.channels.rows());
    c.p_grid = {c.p};
    c.N_f = static_cast<int>(m.channels.cols());
    c.N_sym = symbols ? static_cast<int>(symbols->size()) : c.N_f;
    c.nvec = {c.N_f};
    c.delay_spec = {DelaySpec::Mode::uniform_random, {}, 0.0};
    c.validate();
    const BandConfig band = c.band(c.p);
    m.cfg = band;

    MeasurementSet d = m;
    if (m.kind == MeasurementKind::raw)
    {
        const CorrectionBank bank = c.taps.front() == 0
                                        ? build_exact(c.filter_bank(band), c.pulse_spec(), band)
                                        : design_fir(c.filter_bank(band), c.pulse_spec(), band, c.taps.front());
        d = apply(bank, m);
    }
    RecoveryOptions opts;
    opts.rel_tol = c.rank_tol;
    opts.variant = c.esprit_variant();
    const DelayEstimate est = recover_delays(d, c.K, c.T, opts);
    const RecoveredChannel ch = recover_channel(d, est.delays, band, symbols);

    RunOutput out;
    CsvTable delays{"estimate_delays.csv", {"k", "delay", "eigenvalue_abs"}, {}};
    for (std::size_t k = 0; k < c.K; ++k)
    {
        // eigenvalues come unsorted; report the modulus of the one that produced delay k
        double mod = 0.0;
        for (const cplx &l : est.eigenvalues)
            if (eigenvalue_to_delay(l, c.T) == est.delays[k])
                mod = std::abs(l);
        delays.add_row({std::to_string(k + 1), format_number(est.delays[k]), format_number(mod)});
    }
    out.tables.push_back(std::move(delays));

    CsvTable gains{"estimate_gains.csv", {"k", "n", "re", "im"}, {}};
    const Eigen::MatrixXcd &g = ch.channel_coeffs ? *ch.channel_coeffs : ch.gains;
    for (Eigen::Index k = 0; k < g.rows(); ++k)
        for (Eigen::Index n = 0; n < g.cols(); ++n)
            gains.add_row({std::to_string(k + 1), std::to_string(n), format_number(g(k, n).real()),
                           format_number(g(k, n).imag())});
    out.tables.push_back(std::move(gains));
    return out;
}

/// One trial with full outputs, plus the noisy raw samples as a dataset for `estimate`.
inline RunOutput run_single(const ExperimentConfig &c)
{
    const TrialPoint pt{c.p, c.snr_db.front(), 0, c.taps.front()};
    CorrectionCache cache(c);
    const TrialTruth truth = draw_truth(c, 0, c.f_d.front(), false);
    const MeasurementSet raw = trial_samples(c, truth, pt, 0);
    const TrialResult r = estimate_trial(c, truth, raw, pt, cache, true, 0);

    RunOutput out;
    CsvTable delays{"single_run.csv", {"k", "true_delay", "est_delay", "squared_error"}, {}};
    for (std::size_t k = 0; k < c.K; ++k)
    {
        const std::size_t matched = r.match.truth_of[k];
        delays.add_row({std::to_string(k + 1), format_number(r.true_delays[matched]), format_number(r.est_delays[k]),
                        format_number(r.squared_errors[k])});
    }
    out.tables.push_back(std::move(delays));

    CsvTable gains{"single_run_gains.csv", {"k", "n", "true_re", "true_im", "est_re", "est_im"}, {}};
    for (std::size_t k = 0; k < c.K; ++k)
    {
        const auto tk = static_cast<Eigen::Index>(r.match.truth_of[k]);
        for (Eigen::Index n = 0; n < c.N_sym; ++n)
        {
            const cplx tv = truth.alpha(tk, n);
            const cplx ev = (*r.channel->channel_coeffs)(static_cast<Eigen::Index>(k), n);
            gains.add_row({std::to_string(k + 1), std::to_string(n), format_number(tv.real()),
                           format_number(tv.imag()), format_number(ev.real()), format_number(ev.imag())});
        }
    }
    out.tables.push_back(std::move(gains));
    out.files.emplace_back("dataset.json", make_dataset(c, raw, truth.symbols).dump(1) + "\n");
    return out;
}

inline RunOutput run_scenario(const ExperimentConfig &c, unsigned threads = 1)
{
    c.validate();
    switch (c.scenario)
    {
    case Scenario::channel_est:
        return run_channel_estimation(c, threads);
    case Scenario::mse_vs_snr:
        return run_mse_vs_snr(c, threads);
    case Scenario::mse_vs_p:
        return run_mse_vs_p(c, threads);
    case Scenario::mse_vs_nvec:
        return run_mse_vs_nvec(c, threads);
    case Scenario::mse_vs_taps:
        return run_mse_vs_taps(c, threads);
    case Scenario::single_run:
        return run_single(c);
    }
    throw ConfigError("unknown scenario");
}

inline json make_meta(const ExperimentConfig &c, const RunOutput &out)
{
    json files = json::array();
    for (const auto &t : out.tables)
        files.push_back(t.name);
    for (const auto &f : out.files)
        files.push_back(f.first);
    return json{{"tool", "subnyquist"}, {"version", tool_version}, {"config", config_to_json(c)}, {"outputs", files}};
}

// ---- Self test -------------------------------------------------------------

struct SelftestLine
{
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Fast noiseless end-to-end checks used by `subnyquist selftest`.
inline std::vector<SelftestLine> selftest()
{
    std::vector<SelftestLine> lines;
    auto check = [&lines](const std::string &name, auto &&fn) {
        try
        {
            const auto [ok, detail] = fn();
            lines.push_back({name, ok, detail});
        }
        catch (const std::exception &e)
        {
            lines.push_back({name, false, e.what()});
        }
    };

    check("noiseless ideal bank K=2 p=4", [] {
        ExperimentConfig c = default_config(Scenario::single_run);
        c.snr_db = {std::numeric_limits<double>::infinity()};
        const RunOutput out = run_single(c);
        double worst = 0.0;
        for (std::size_t r = 0; r < out.tables[0].rows.size(); ++r)
            worst = std::max(worst, std::sqrt(out.tables[0].value(r, "squared_error")));
        return std::make_pair(worst < 1e-8, "max delay error " + format_number(worst) + " T");
    });
    check("coherent gains take the smoothing path", [] {
        const BandConfig band{4, 0, 1.0, 64};
        const DelaySet tau({0.2, 0.7}, 1.0);
        GainSequences a(2, 64);
        for (Eigen::Index n = 0; n < 64; ++n)
        {
            a(0, n) = std::polar(1.0, two_pi * 3.0 * n / 64.0);
            a(1, n) = 2.0 * a(0, n);
        }
        const MeasurementSet c = synthesize_samples(tau, a, IdealBandpassBank{}, FlatOnBandPulse{}, band);
        const DelayEstimate e = recover_delays(apply(build_exact(IdealBandpassBank{}, FlatOnBandPulse{}, band), c), 2,
                                               1.0);
        const double err = std::sqrt(delay_error(e.delays, tau, 1.0));
        return std::make_pair(e.smoothed && err < 1e-8, "rms error " + format_number(err) + " T");
    });
    check("delayed bank, dirac pulse K=1 p=2", [] {
        const BandConfig band{2, -1, 1.0, 32};
        const DelaySet tau({0.3}, 1.0);
        GainSequences a = GainSequences::Zero(1, 32);
        for (Eigen::Index n = 0; n < 32; ++n)
            a(0, n) = cplx(std::cos(0.3 * n), std::sin(0.7 * n));
        const FilterBankSpec bank = uniform_delayed_bank(band);
        const MeasurementSet c = synthesize_samples(tau, a, bank, DiracPulse{}, band);
        const DelayEstimate e = recover_delays(apply(build_exact(bank, DiracPulse{}, band), c), 1, 1.0);
        const double err = std::fabs(e.delays[0] - 0.3);
        return std::make_pair(err < 1e-8, "error " + format_number(err) + " T");
    });
    return lines;
}

} // namespace subnyquist::harness

#endif // SUBNYQUIST_HARNESS_EXPERIMENTS_HPP
