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

#ifndef SUBNYQUIST_HARNESS_METRICS_HPP
#define SUBNYQUIST_HARNESS_METRICS_HPP

#include "subnyquist/errors.hpp"
#include "subnyquist/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace subnyquist::harness
{

/// min(|a-b|, T-|a-b|) for a, b in [0,T).
inline double circular_distance(double a, double b, double T)
{
    const double d = std::fabs(a - b);
    return std::min(d, T - d);
}

struct DelayMatch
{
    /// truth_of[i] is the index of the true delay matched to estimate i.
    std::vector<std::size_t> truth_of;
    /// Squared circular distances per estimate, in units of T^2.
    std::vector<double> squared_errors;
    double mean_squared_error = 0.0;
};

/// Minimum-cost perfect matching under squared circular distance (exact DP over subsets).
inline DelayMatch match_delays(const DelaySet &est, const DelaySet &truth, double T)
{
    const std::size_t K = truth.size();
    if (est.size() != K)
        throw ConfigError("delay_error: estimate and truth differ in size");
    if (K > 20)
        throw ConfigError("delay_error: matching supports at most 20 delays");
    DelayMatch out;
    if (K == 0)
        return out;

    std::vector<std::vector<double>> cost(K, std::vector<double>(K));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
        {
            const double d = circular_distance(est[i], truth[j], T) / T;
            cost[i][j] = d * d;
        }

    // best[mask]: cheapest assignment of estimates 0..popcount(mask)-1 onto the truths in mask.
    const std::size_t full = (std::size_t{1} << K) - 1;
    std::vector<double> best(full + 1, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> choice(full + 1, 0);
    best[0] = 0.0;
    for (std::size_t mask = 0; mask < full; ++mask)
    {
        if (!std::isfinite(best[mask]))
            continue;
        const std::size_t i = static_cast<std::size_t>(std::popcount(mask));
        for (std::size_t j = 0; j < K; ++j)
        {
            if (mask & (std::size_t{1} << j))
                continue;
            const std::size_t next = mask | (std::size_t{1} << j);
            const double c = best[mask] + cost[i][j];
            if (c < best[next])
            {
                best[next] = c;
                choice[next] = j;
            }
        }
    }
    out.truth_of.assign(K, 0);
    out.squared_errors.assign(K, 0.0);
    std::size_t mask = full;
    for (std::size_t i = K; i-- > 0;)
    {
        const std::size_t j = choice[mask];
        out.truth_of[i] = j;
        out.squared_errors[i] = cost[i][j];
        mask &= ~(std::size_t{1} << j);
    }
    out.mean_squared_error = best[full] / static_cast<double>(K);
    return out;
}

/// Mean squared circular delay error, normalized by T^2, after optimal matching.
inline double delay_error(const DelaySet &est, const DelaySet &truth, double T)
{
    return match_delays(est, truth, T).mean_squared_error;
}

/// Pairwise (cascade) summation; the reduction order depends only on the input length.
inline double pairwise_sum(std::span<const double> x)
{
    if (x.size() <= 8)
    {
        double s = 0.0;
        for (double v : x)
            s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct MeanEstimate
{
    double mean = 0.0;
    double standard_error = 0.0;
};

inline MeanEstimate mean_and_se(std::span<const double> x)
{
    MeanEstimate out;
    if (x.empty())
        return out;
    const double n = static_cast<double>(x.size());
    out.mean = pairwise_sum(x) / n;
    if (x.size() > 1)
    {
        std::vector<double> dev(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            dev[i] = (x[i] - out.mean) * (x[i] - out.mean);
        out.standard_error = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
    }
    return out;
}

/// Median (mean of the two central values for even sizes).
inline double median(std::vector<double> x)
{
    if (x.empty())
        return 0.0;
    const std::size_t h = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(h), x.end());
    const double hi = x[h];
    if (x.size() % 2 == 1)
        return hi;
    const double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(h));
    return 0.5 * (lo + hi);
}

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of random stream `stream` in trial `trial`, derived from the master seed only.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream = 0)
{
    return mix64(mix64(mix64(master) ^ trial) ^ (stream * 0x632be59bd9b4e019ULL));
}

} // namespace subnyquist::harness

#endif // SUBNYQUIST_HARNESS_METRICS_HPP
