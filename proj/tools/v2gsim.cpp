/*
 * Copyright (C) 2026 the v2gsim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "v2g/scenario.hpp"
#include "v2g/world.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitConfig = 2;

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

void write_file(const fs::path& path, const v2g::Bytes& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

int run_command(const std::string& scenario_path, const fs::path& out_dir,
                const std::optional<std::uint64_t>& seed,
                const std::optional<std::string>& curve,
                const std::optional<std::uint64_t>& window_ms,
                const std::optional<std::uint32_t>& speaker_term,
                const std::optional<std::uint64_t>& block_interval_ms,
                bool literal_formula) {
    v2g::scenario::ScenarioSpec spec = v2g::scenario::parse_scenario_file(scenario_path);
    if (seed) spec.seed = *seed;
    if (curve) spec.curve = *curve;
    if (window_ms) spec.window_ms = *window_ms;
    if (speaker_term) spec.speaker_term = *speaker_term;
    if (block_interval_ms) spec.block_interval_ms = *block_interval_ms;
    if (literal_formula) spec.literal_speaker_formula = true;
    spec.validate();

    v2g::world::RunArtifacts art = v2g::world::run_scenario(spec);

    fs::create_directories(out_dir);
    write_file(out_dir / "metrics.txt", art.metrics.full_text());
    write_file(out_dir / "trace.log", art.trace_text);
    write_file(out_dir / "ledger.bin", art.ledger_bytes);

    std::cout << art.metrics.overhead_table();
    if (art.metrics.runs_total == 0) {
        std::cout << "warning: scenario completed no authentication runs\n";
    }
    for (const std::string& v : art.metrics.verdicts) std::cout << "verdict: " << v << "\n";
    if (!art.ok()) {
        for (const std::string& f : art.metrics.failures) {
            std::cerr << "assertion failed: " << f << "\n";
        }
        return kExitAssertion;
    }
    return kExitOk;
}

int verify_command(const std::string& path) {
    if (!fs::exists(path)) {
        std::cerr << "ledger file not found: " << path << "\n";
        return kExitConfig;
    }
    v2g::consensus::VerifyReport report = v2g::consensus::verify_ledger_file(path);
    if (report.ok) {
        std::cout << "ledger OK (" << report.block_count << " blocks)\n";
        return kExitOk;
    }
    std::cout << "ledger INVALID at height " << *report.fail_height << ": " << report.detail
              << "\n";
    return kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"v2gsim - V2G authentication and trading protocol simulator"};
    app.require_subcommand(0, 1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::string curve;
    std::uint64_t window_ms = 0;
    std::uint32_t speaker_term = 0;
    std::uint64_t block_interval_ms = 0;
    bool literal_formula = false;

    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario file to execute")
            ->required();
        cmd->add_option("--out", out_dir, "output directory (metrics.txt, trace.log, ledger.bin)");
        cmd->add_option("--seed", seed, "override the scenario seed");
        cmd->add_option("--curve", curve, "override the curve (p256 | toy)");
        cmd->add_option("--window-ms", window_ms, "override the freshness window");
        cmd->add_option("--speaker-term", speaker_term, "override the speaker term m");
        cmd->add_option("--block-interval-ms", block_interval_ms,
                        "override the block interval t");
        cmd->add_flag("--literal-speaker-formula", literal_formula,
                      "use the literal height-mod-term speaker rule");
        return cmd;
    };

    CLI::App* run_cmd = add_run_options(app.add_subcommand("run", "execute a scenario"));

    std::string ledger_path;
    CLI::App* verify_cmd =
        app.add_subcommand("verify-ledger", "check a ledger file's hash chain");
    verify_cmd->add_option("path", ledger_path, "ledger file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (verify_cmd->parsed()) {
            return verify_command(ledger_path);
        }
        if (run_cmd->parsed()) {
            auto opt_u64 = [&](const char* name, std::uint64_t v) {
                return run_cmd->count(name) ? std::optional<std::uint64_t>(v) : std::nullopt;
            };
            return run_command(
                scenario_path, out_dir, opt_u64("--seed", seed),
                run_cmd->count("--curve") ? std::optional<std::string>(curve) : std::nullopt,
                opt_u64("--window-ms", window_ms),
                run_cmd->count("--speaker-term") ? std::optional<std::uint32_t>(speaker_term)
                                                 : std::nullopt,
                opt_u64("--block-interval-ms", block_interval_ms), literal_formula);
        }
        std::cerr << app.help();
        return kExitConfig;
    } catch (const v2g::sim::ScenarioConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const v2g::sim::ScenarioFailure& e) {
        std::cerr << "scenario failure: " << e.what() << "\n";
        return kExitAssertion;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
