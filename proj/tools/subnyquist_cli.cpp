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

#include "subnyquist/harness/config.hpp"
#include "subnyquist/harness/experiments.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace fs = std::filesystem;
namespace sh = subnyquist::harness;

namespace
{

enum ExitCode
{
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_numerical = 3
};

sh::json read_json(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw subnyquist::ConfigError("cannot open " + path);
    try
    {
        return sh::json::parse(in);
    }
    catch (const sh::json::exception &e)
    {
        throw subnyquist::ConfigError(path + ": " + e.what());
    }
}

void write_file(const fs::path &path, const std::string &contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw subnyquist::ConfigError("cannot write " + path.string());
    out << contents;
}

void write_outputs(const fs::path &dir, const sh::RunOutput &out, const std::optional<sh::json> &meta)
{
    fs::create_directories(dir);
    for (const auto &t : out.tables)
    {
        write_file(dir / t.name, t.to_string());
        std::cout << "wrote " << (dir / t.name).string() << '\n';
    }
    for (const auto &[name, contents] : out.files)
    {
        write_file(dir / name, contents);
        std::cout << "wrote " << (dir / name).string() << '\n';
    }
    if (meta)
    {
        write_file(dir / "meta.json", meta->dump(2) + "\n");
        std::cout << "wrote " << (dir / "meta.json").string() << '\n';
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Multipath delay and gain estimation from low-rate filter-bank samples"};
    app.set_version_flag("--version", sh::tool_version);
    app.require_subcommand(1);

    std::string scenario_name;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out_dir = "out";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    auto *run = app.add_subcommand("run", "Run a scenario and write CSV tables plus meta.json");
    std::vector<std::string> names;
    for (const auto &entry : sh::scenario_names())
        names.push_back(entry.second);
    run->add_option("scenario", scenario_name, "Scenario name")->required()->check(CLI::IsMember(names));
    run->add_option("--config", config_path, "JSON config file (keys mirror ExperimentConfig)")
        ->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--trials", trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string input_path;
    auto *estimate = app.add_subcommand("estimate", "Estimate delays and gains from one dataset file");
    estimate->add_option("--input", input_path, "Dataset JSON (as written by `run single-run`)")
        ->required()
        ->check(CLI::ExistingFile);
    estimate->add_option("--out", out_dir, "Output directory");

    auto *selftest = app.add_subcommand("selftest", "Quick noiseless end-to-end checks");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_config;
    }

    try
    {
        if (run->parsed())
        {
            const sh::Scenario s = sh::parse_scenario(scenario_name);
            sh::ExperimentConfig cfg = config_path.empty() ? sh::default_config(s)
                                                           : sh::config_from_json(read_json(config_path), s);
            if (seed)
                cfg.seed = *seed;
            if (trials)
                cfg.trials = *trials;
            cfg.validate();
            const sh::RunOutput out = sh::run_scenario(cfg, threads);
            write_outputs(out_dir, out, sh::make_meta(cfg, out));
        }
        else if (estimate->parsed())
        {
            const sh::RunOutput out = sh::estimate_dataset(read_json(input_path));
            std::cout << out.tables.front().to_string();
            write_outputs(out_dir, out, std::nullopt);
        }
        else if (selftest->parsed())
        {
            bool ok = true;
            for (const auto &line : sh::selftest())
            {
                std::cout << (line.pass ? "PASS " : "FAIL ") << line.name << " (" << line.detail << ")\n";
                ok = ok && line.pass;
            }
            return ok ? exit_ok : exit_numerical;
        }
    }
    catch (const subnyquist::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const subnyquist::DomainError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const subnyquist::NumericalError &e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_ok;
}
