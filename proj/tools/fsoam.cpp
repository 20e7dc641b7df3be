// fsoam: figure-data sweeps, Monte Carlo runs and validation for adaptive
// subcarrier PSK over lognormal turbulence.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <tuple>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsoam/cli.hpp"

namespace {

using fsoam::cli::Command;
using fsoam::cli::SweepSpec;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

// key=value lines; '#' starts a comment. Keys are long option names.
std::vector<std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fsoam::ConfigError("cannot open config file '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw fsoam::ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") {
            throw fsoam::ConfigError(path + ":" + std::to_string(lineno) + ": invalid key");
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

// Config-file options are spliced in right after the subcommand, so flags
// given on the command line come later and win (options take the last value).
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            continue;
        }
        const auto extra = read_config(path);
        const auto insert_at = args.empty() ? args.begin() : args.begin() + 1;
        args.insert(insert_at, extra.begin(), extra.end());
        break;
    }
    return args;
}

std::uint64_t parse_count(const std::string& text, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(v >= 1.0) || v > 1e18 || v != std::floor(v)) {
        throw fsoam::ConfigError(std::string(what) + " must be a positive integer, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(v);
}

std::filesystem::path resolve_output(const std::string& out) {
    std::filesystem::path p(out);
    if (p.is_relative()) {
        if (const char* dir = std::getenv(fsoam::cli::kOutputDirEnv); dir && *dir) {
            p = std::filesystem::path(dir) / p;
        }
    }
    return p;
}

void emit(const fsoam::cli::Table& table, const SweepSpec& spec) {
    for (const auto& n : table.notes) std::cerr << "note: " << n << '\n';
    if (spec.output_path.empty()) {
        fsoam::cli::write_table(table, spec.format, std::cout);
        return;
    }
    const auto path = resolve_output(spec.output_path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fsoam::ConfigError("cannot write output file '" + path.string() + "'");
    fsoam::cli::write_table(table, spec.format, out);
}

struct RawOptions {
    std::string snr = "0:30:0.5";
    std::string mimo;
    std::string format = "csv";
    std::string symbols = "1e7";
    std::string config;
};

void add_common(CLI::App* sub, SweepSpec& spec, RawOptions& raw) {
    sub->add_option("--sigma-x", spec.sigma_x, "log-amplitude std sigma_x, (0, 1]");
    sub->add_option("--po", spec.p_o, "target BER P_o");
    sub->add_option("--n", spec.n_orders, "number of modulation orders N (M = 2..2^N)");
    sub->add_option("--snr", raw.snr, "SNR grid start:stop:step [dB]");
    sub->add_option("--mimo", raw.mimo, "apertures FxL, e.g. 2x2");
    sub->add_option("--seed", spec.seed, "RNG seed");
    sub->add_option("--out", spec.output_path,
                    std::string("output file (relative paths go under $") + fsoam::cli::kOutputDirEnv + ")");
    sub->add_option("--format", raw.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", spec.workers, "worker threads (0 = all cores)");
    sub->add_option("--config", raw.config, "key=value file; command-line flags override it");
}

int run_command(const SweepSpec& spec) {
    using namespace fsoam::cli;
    switch (spec.command) {
        case Command::spectral: emit(cmd_spectral(spec), spec); return kExitOk;
        case Command::ber: emit(cmd_ber(spec), spec); return kExitOk;
        case Command::thresholds: emit(cmd_thresholds(spec), spec); return kExitOk;
        case Command::capacity: emit(cmd_capacity(spec), spec); return kExitOk;
        case Command::simulate: emit(cmd_simulate(spec), spec); return kExitOk;
        case Command::validate: {
            const ValidationOutcome outcome = cmd_validate(spec);
            const auto brief = [](const fsoam::cli::Json& cell) {
                if (!cell.is_number_float()) return fsoam::cli::format_cell(cell);
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.6g", cell.get<double>());
                return std::string(buf);
            };
            for (const auto& row : outcome.table.rows) {
                std::cerr << "[" << row[1].get<std::string>() << "] " << row[0].get<std::string>()
                          << " snr=" << brief(row[3]) << "dB sigma_x=" << brief(row[4])
                          << " channel=" << row[5].get<std::string>() << " analytic=" << brief(row[6])
                          << " measured=" << brief(row[7]) << " gap=" << brief(row[8]) << " ("
                          << row[11].get<std::string>() << ")\n";
            }
            std::cerr << "validation: " << (outcome.all_passed ? "PASS" : "FAIL") << '\n';
            emit(outcome.table, spec);
            return outcome.all_passed ? kExitOk : kExitValidation;
        }
    }
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive subcarrier PSK over lognormal FSO turbulence"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", fsoam::cli::kToolVersion);

    SweepSpec spec;
    RawOptions raw;
    const std::vector<std::pair<Command, std::string>> commands{
        {Command::spectral, "adaptive / capacity / BPSK spectral efficiency vs SNR"},
        {Command::ber, "adaptive and fixed-order average BER vs SNR"},
        {Command::thresholds, "region boundaries I_1..I_N vs SNR"},
        {Command::capacity, "capacity upper bound (closed form and numeric) vs SNR"},
        {Command::simulate, "Monte Carlo link simulation at one SNR"},
        {Command::validate, "simulator-vs-analytics validation suite"}};
    std::map<CLI::App*, Command> by_app;
    for (const auto& [cmd, help] : commands) {
        CLI::App* sub = app.add_subcommand(fsoam::cli::to_string(cmd), help);
        add_common(sub, spec, raw);
        if (cmd == Command::simulate) {
            sub->add_option("--mode", spec.mode, "adaptive or fixed")->check(CLI::IsMember({"adaptive", "fixed"}));
            sub->add_option("--order", spec.order, "constellation size M for --mode fixed");
            sub->add_option("--snr-db", spec.snr_db, "average SNR [dB]");
            sub->add_option("--symbols", raw.symbols, "total symbols (e.g. 1e7)");
            sub->add_option("--block-size", spec.block_size, "symbols per fading block K");
        }
        if (cmd == Command::validate) {
            sub->add_option("--grid", spec.grid, "default or quick");
            sub->add_option("--tolerance", spec.tolerance, "relative tolerance of each comparison");
        }
        by_app[sub] = cmd;
    }

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        for (const auto& [sub, cmd] : by_app) {
            if (sub->parsed()) spec.command = cmd;
        }
        spec.snr = fsoam::cli::parse_snr_range(raw.snr);
        if (!raw.mimo.empty()) {
            std::tie(spec.mimo_f, spec.mimo_l) = fsoam::cli::parse_mimo(raw.mimo);
            spec.mimo = true;
        }
        spec.format = raw.format == "json" ? fsoam::cli::Format::json : fsoam::cli::Format::csv;
        spec.symbols = parse_count(raw.symbols, "--symbols");
        return run_command(spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
