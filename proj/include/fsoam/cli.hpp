#pragma once

// Command implementations behind the `fsoam` tool. Each command turns a
// SweepSpec into a Table; writers serialize tables as CSV (17 significant
// digits, fixed column order) or JSON (same rows plus a metadata envelope).

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fsoam/adaptation.hpp"
#include "fsoam/errors.hpp"
#include "fsoam/link.hpp"
#include "fsoam/simulator.hpp"
#include "fsoam/turbulence.hpp"

namespace fsoam::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "FSOAM_OUTPUT_DIR";

enum class Command { spectral, ber, thresholds, capacity, simulate, validate };
enum class Format { csv, json };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::spectral: return "spectral";
        case Command::ber: return "ber";
        case Command::thresholds: return "thresholds";
        case Command::capacity: return "capacity";
        case Command::simulate: return "simulate";
        case Command::validate: return "validate";
    }
    return "?";
}

struct SnrRange {
    double start = 0.0;
    double stop = 30.0;
    double step = 0.5;
};

struct SweepSpec {
    Command command = Command::spectral;
    SnrRange snr;
    double sigma_x = 0.3;
    double p_o = 1e-3;
    int n_orders = 5;
    int mimo_f = 1;
    int mimo_l = 1;
    bool mimo = false;
    std::uint64_t seed = 42;
    std::string output_path;
    Format format = Format::csv;
    unsigned workers = 0;

    // simulate
    std::string mode = "adaptive";
    unsigned order = 2;
    double snr_db = 15.0;
    std::uint64_t symbols = 10'000'000;
    std::uint64_t block_size = 1;

    // validate
    std::string grid = "default";
    double tolerance = 0.05;
};

/// Parses "start:stop:step".
inline SnrRange parse_snr_range(const std::string& text) {
    SnrRange r;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &r.start, &r.stop, &r.step, &tail) != 3) {
        throw ConfigError("SNR range must be start:stop:step, got '" + text + "'");
    }
    return r;
}

/// Parses "FxL", e.g. "2x2".
inline std::pair<int, int> parse_mimo(const std::string& text) {
    int f = 0;
    int l = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%dx%d%c", &f, &l, &tail) != 2 || f < 1 || l < 1) {
        throw ConfigError("MIMO configuration must be FxL with F, L >= 1, got '" + text + "'");
    }
    return {f, l};
}

inline std::vector<double> snr_grid(const SnrRange& r) {
    if (!(r.step > 0.0) || !std::isfinite(r.step)) throw ConfigError("SNR step must be positive");
    if (!(r.start <= r.stop)) throw ConfigError("SNR range start must not exceed stop");
    const auto count = static_cast<long long>(std::floor((r.stop - r.start) / r.step + 1e-9)) + 1;
    if (count > 1'000'000) throw ConfigError("SNR grid too large");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (long long k = 0; k < count; ++k) grid.push_back(r.start + static_cast<double>(k) * r.step);
    return grid;
}

inline Channel make_channel(const SweepSpec& spec) {
    if (spec.mimo) return MimoConfig(spec.sigma_x, spec.mimo_f, spec.mimo_l);
    return TurbulenceParams(spec.sigma_x);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;
    Json metadata = Json::object();
    std::vector<std::string> notes;
};

inline Json number_or_null(const std::optional<double>& v) {
    return v ? Json(*v) : Json(std::nan(""));
}

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_cell(const Json& cell) {
    if (cell.is_number_float()) return format_double(cell.get<double>());
    if (cell.is_number_unsigned()) return std::to_string(cell.get<std::uint64_t>());
    if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
    if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
    if (cell.is_null()) return "nan";
    if (cell.is_string()) {
        const auto& s = cell.get_ref<const std::string&>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char ch : s) {
            if (ch == '"') quoted += '"';
            quoted += ch;
        }
        return quoted + "\"";
    }
    return cell.dump();
}

inline void write_csv(const Table& t, std::ostream& os) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_cell(row[c]);
        os << '\n';
    }
}

inline Json finite_or_null(const Json& cell) {
    if (cell.is_number_float() && !std::isfinite(cell.get<double>())) return nullptr;
    return cell;
}

inline void write_json(const Table& t, std::ostream& os) {
    Json doc;
    Json meta = t.metadata;
    meta["notes"] = t.notes;
    doc["metadata"] = meta;
    doc["columns"] = t.columns;
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json obj = Json::object();
        for (std::size_t c = 0; c < row.size(); ++c) obj[t.columns[c]] = finite_or_null(row[c]);
        rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    os << doc.dump(2) << '\n';
}

inline void write_table(const Table& t, Format f, std::ostream& os) {
    if (f == Format::csv) write_csv(t, os);
    else write_json(t, os);
}

inline Json spec_echo(const SweepSpec& s) {
    Json j;
    j["command"] = to_string(s.command);
    j["snr_db"] = {{"start", s.snr.start}, {"stop", s.snr.stop}, {"step", s.snr.step}};
    j["sigma_x"] = s.sigma_x;
    j["p_o"] = s.p_o;
    j["n_orders"] = s.n_orders;
    j["mimo"] = s.mimo ? Json(std::to_string(s.mimo_f) + "x" + std::to_string(s.mimo_l)) : Json(nullptr);
    j["seed"] = s.seed;
    return j;
}

inline Table make_table(const SweepSpec& spec, std::vector<std::string> columns) {
    Table t;
    t.columns = std::move(columns);
    t.metadata["tool"] = "fsoam";
    t.metadata["version"] = kToolVersion;
    t.metadata["seed"] = spec.seed;
    t.metadata["spec"] = spec_echo(spec);
    return t;
}

inline void collect_point_notes(Table& t, const PerfPoint& p) {
    for (const auto& n : p.notes) t.notes.push_back("snr " + format_double(p.snr_db) + " dB: " + n);
    if (p.error) t.notes.push_back("snr " + format_double(p.snr_db) + " dB: error: " + *p.error);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// snr_db, S_adaptive, S_capacity_upper, S_bpsk_nonadaptive, outage_prob.
inline Table cmd_spectral(const SweepSpec& spec) {
    Table t = make_table(spec, {"snr_db", "S_adaptive", "S_capacity_upper", "S_bpsk_nonadaptive",
                                "outage_prob"});
    const auto grid = snr_grid(spec.snr);
    const Channel channel = make_channel(spec);
    std::visit(
        [&](const auto& model) {
            const auto points = sweep(SchemeTemplate{spec.n_orders, spec.p_o}, model, grid, spec.workers);
            std::vector<double> capacity(grid.size());
            std::vector<double> bpsk(grid.size());
            parallel_for(grid.size(), spec.workers, [&](std::size_t k) {
                const LinkBudget b = LinkBudget::from_db(grid[k]);
                capacity[k] = capacity_upper_closed(model, b, 1.0);
                bpsk[k] = ber_average(ModOrder(2), model, b) <= spec.p_o ? 0.5 : 0.0;
            });
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const PerfPoint& p = points[k];
                collect_point_notes(t, p);
                const double nan = std::nan("");
                t.rows.push_back({grid[k], p.error ? nan : p.spectral_eff, capacity[k], bpsk[k],
                                  p.error ? nan : p.outage_prob});
            }
            for (const auto& n : capacity_caveats(model, LinkBudget::from_db(grid.front()))) {
                t.notes.push_back("capacity: " + n);
            }
        },
        channel);
    return t;
}

/// snr_db, ber_adaptive, ber_fixed_<M> for M = 2..2^N, p_o_reference.
inline Table cmd_ber(const SweepSpec& spec) {
    std::vector<std::string> cols{"snr_db", "ber_adaptive"};
    for (int j = 1; j <= spec.n_orders; ++j) cols.push_back("ber_fixed_" + std::to_string(1U << j));
    cols.emplace_back("p_o_reference");
    Table t = make_table(spec, std::move(cols));
    const auto grid = snr_grid(spec.snr);
    const Channel channel = make_channel(spec);
    std::visit(
        [&](const auto& model) {
            const auto points = sweep(SchemeTemplate{spec.n_orders, spec.p_o}, model, grid, spec.workers);
            std::vector<std::vector<double>> fixed(grid.size());
            parallel_for(grid.size(), spec.workers, [&](std::size_t k) {
                const LinkBudget b = LinkBudget::from_db(grid[k]);
                for (int j = 1; j <= spec.n_orders; ++j) {
                    fixed[k].push_back(ber_average(ModOrder::from_index(j), model, b));
                }
            });
            for (std::size_t k = 0; k < grid.size(); ++k) {
                collect_point_notes(t, points[k]);
                std::vector<Json> row{grid[k], number_or_null(points[k].avg_ber)};
                for (double v : fixed[k]) row.emplace_back(v);
                row.emplace_back(spec.p_o);
                t.rows.push_back(std::move(row));
            }
        },
        channel);
    return t;
}

/// snr_db, I_1..I_N (nan where an order was dropped).
inline Table cmd_thresholds(const SweepSpec& spec) {
    std::vector<std::string> cols{"snr_db"};
    for (int j = 1; j <= spec.n_orders; ++j) cols.push_back("I_" + std::to_string(j));
    Table t = make_table(spec, std::move(cols));
    for (double db : snr_grid(spec.snr)) {
        const AdaptiveScheme s = compute_boundaries(spec.n_orders, spec.p_o, LinkBudget::from_db(db));
        std::vector<Json> row{db};
        for (int j = 1; j <= spec.n_orders; ++j) {
            row.emplace_back(j <= s.n_orders() ? s.boundary(j) : std::nan(""));
        }
        for (const auto& n : s.notes()) t.notes.push_back("snr " + format_double(db) + " dB: " + n);
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// snr_db, capacity_closed, capacity_numeric (bit/s/Hz).
inline Table cmd_capacity(const SweepSpec& spec) {
    Table t = make_table(spec, {"snr_db", "capacity_closed", "capacity_numeric"});
    const Channel channel = make_channel(spec);
    const auto grid = snr_grid(spec.snr);
    std::visit(
        [&](const auto& model) {
            for (double db : grid) {
                const LinkBudget b = LinkBudget::from_db(db);
                t.rows.push_back({db, capacity_upper_closed(model, b, 1.0),
                                  capacity_upper_numeric(model, b, 1.0)});
            }
            for (const auto& n : capacity_caveats(model, LinkBudget::from_db(grid.front()))) {
                t.notes.push_back(n);
            }
        },
        channel);
    return t;
}

/// One row summarizing a simulation and its analytic counterparts.
inline Table cmd_simulate(const SweepSpec& spec) {
    const Channel channel = make_channel(spec);
    const LinkBudget budget = LinkBudget::from_db(spec.snr_db);
    if (spec.block_size < 1) throw ConfigError("block size must be >= 1");
    if (spec.symbols < spec.block_size) throw ConfigError("symbol count must be >= block size");

    SimConfig cfg{.blocks = spec.symbols / spec.block_size, .symbols_per_block = spec.block_size,
                  .seed = spec.seed, .mode = FixedOrderMode{ModOrder(2)}, .channel = channel,
                  .budget = budget, .workers = spec.workers};
    int max_index = 0;
    double analytic_ber = 0.0;
    double analytic_s = 0.0;
    if (spec.mode == "adaptive") {
        const AdaptiveScheme scheme = compute_boundaries(spec.n_orders, spec.p_o, budget);
        max_index = scheme.n_orders();
        cfg.mode = AdaptiveMode{scheme};
        std::visit(
            [&](const auto& m) {
                analytic_s = spectral_efficiency(scheme, m);
                analytic_ber = average_ber_adaptive(scheme, m).value_or(std::nan(""));
            },
            channel);
    } else if (spec.mode == "fixed") {
        const ModOrder order(spec.order);
        max_index = order.bits();
        cfg.mode = FixedOrderMode{order};
        analytic_ber = std::visit([&](const auto& m) { return ber_average(order, m, budget); }, channel);
        analytic_s = 0.5 * order.bits();
    } else {
        throw ConfigError("simulate mode must be 'adaptive' or 'fixed'");
    }

    std::vector<std::string> cols{"snr_db", "mode", "symbols", "bits_sent", "bit_errors", "ber",
                                  "ber_ci95", "ber_analytic", "throughput_bits_per_symbol",
                                  "S_simulated", "S_analytic", "outage_fraction", "blocks_no_tx"};
    for (int j = 1; j <= max_index; ++j) cols.push_back("blocks_M" + std::to_string(1U << j));
    Table t = make_table(spec, std::move(cols));
    t.metadata["spec"]["mode"] = spec.mode;
    t.metadata["spec"]["snr_db_point"] = spec.snr_db;
    t.metadata["spec"]["symbols"] = spec.symbols;
    t.metadata["spec"]["block_size"] = spec.block_size;

    const SimReport r = run(cfg);
    std::vector<Json> row{spec.snr_db, spec.mode, r.symbols, r.bits_sent, r.bit_errors, r.ber_point,
                          r.ber_ci95, analytic_ber, r.throughput_bits_per_symbol,
                          0.5 * r.throughput_bits_per_symbol, analytic_s, r.outage_fraction};
    for (auto count : r.per_region_histogram) row.emplace_back(count);
    t.rows.push_back(std::move(row));
    return t;
}

struct ValidationOutcome {
    Table table;
    bool all_passed = true;
};

namespace detail {

inline bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

inline bool same_point(const PerfPoint& a, const PerfPoint& b) {
    const auto same_vec = [](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!same_bits(x[i], y[i])) return false;
        }
        return true;
    };
    return same_bits(a.snr_db, b.snr_db) && same_bits(a.spectral_eff, b.spectral_eff) &&
           a.avg_ber.has_value() == b.avg_ber.has_value() &&
           (!a.avg_ber || same_bits(*a.avg_ber, *b.avg_ber)) && same_bits(a.outage_prob, b.outage_prob) &&
           same_vec(a.region_probs, b.region_probs) && same_vec(a.boundaries, b.boundaries);
}

} // namespace detail

/// SISO and MIMO (1,1) analytics and simulations agree bit for bit.
inline bool mimo_unit_equivalence(double sigma_x, double p_o, int n_orders, std::uint64_t seed,
                                  unsigned workers = 0) {
    const TurbulenceParams siso(sigma_x);
    const MimoConfig unit(sigma_x, 1, 1);
    const auto grid = snr_grid({0.0, 30.0, 0.5});
    const auto a = sweep(SchemeTemplate{n_orders, p_o}, siso, grid, workers);
    const auto b = sweep(SchemeTemplate{n_orders, p_o}, unit, grid, workers);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!detail::same_point(a[k], b[k])) return false;
        const LinkBudget budget = LinkBudget::from_db(grid[k]);
        if (!detail::same_bits(capacity_upper_closed(siso, budget, 1.0),
                               capacity_upper_closed(unit, budget, 1.0)) ||
            !detail::same_bits(ber_average(ModOrder(2), siso, budget),
                               ber_average(ModOrder(2), unit, budget))) {
            return false;
        }
    }
    const LinkBudget budget = LinkBudget::from_db(15.0);
    const AdaptiveScheme scheme = compute_boundaries(n_orders, p_o, budget);
    SimConfig cfg{.blocks = 20'000, .symbols_per_block = 4, .seed = seed,
                  .mode = AdaptiveMode{scheme}, .channel = siso, .budget = budget, .workers = workers};
    const SimReport r_siso = run(cfg);
    cfg.channel = unit;
    return r_siso == run(cfg);
}

/// Simulator-vs-analytics suite. Grids: "default" (full) or "quick".
inline ValidationOutcome cmd_validate(const SweepSpec& spec) {
    if (!(spec.tolerance > 0.0)) {
        throw ConfigError("tolerance must be positive (got " + format_double(spec.tolerance) + ")");
    }
    if (spec.grid != "default" && spec.grid != "quick") {
        throw ConfigError("unknown validation grid '" + spec.grid + "' (use default or quick)");
    }
    ValidationOutcome out;
    out.table = make_table(spec, {"check", "status", "quantity", "snr_db", "sigma_x", "channel",
                                  "analytic", "measured", "signed_gap", "half_width", "symbols",
                                  "message"});
    out.table.metadata["spec"]["grid"] = spec.grid;
    out.table.metadata["spec"]["tolerance"] = spec.tolerance;
    const bool quick = spec.grid == "quick";

    ValidationOptions opt;
    opt.seed = spec.seed;
    opt.workers = spec.workers;

    const auto add = [&](const std::string& name, double snr_db, double sigma, const std::string& channel,
                         const ValidationResult& r) {
        if (r.status == ValidationStatus::fail) out.all_passed = false;
        std::string message = r.message;
        if (!r.region_gaps.empty()) {
            message += "; b_j gap (exact - lognormal):";
            for (double g : r.region_gaps) message += " " + format_double(g);
        }
        out.table.rows.push_back({name, to_string(r.status), r.quantity, snr_db, sigma, channel,
                                  r.analytic, r.measured, r.signed_gap, r.half_width, r.symbols,
                                  message});
    };

    const std::vector<double> sigmas = quick ? std::vector<double>{0.5} : std::vector<double>{0.1, 0.3, 0.5};
    const std::vector<double> snrs = quick ? std::vector<double>{10.0} : std::vector<double>{5.0, 10.0, 15.0, 20.0};
    for (double sigma : sigmas) {
        for (double db : snrs) {
            add("fixed_bpsk", db, sigma, "siso",
                validate_point(db, TurbulenceParams(sigma), FixedTarget{ModOrder(2)}, spec.tolerance, opt));
        }
    }
    const std::vector<double> adaptive_snrs = quick ? std::vector<double>{10.0} : std::vector<double>{10.0, 15.0, 20.0};
    for (double db : adaptive_snrs) {
        add("adaptive", db, 0.3, "siso",
            validate_point(db, TurbulenceParams(0.3), AdaptiveTarget{5, 1e-3}, spec.tolerance, opt));
    }

    const bool unit_ok = mimo_unit_equivalence(0.3, 1e-3, 5, spec.seed, spec.workers);
    if (!unit_ok) out.all_passed = false;
    out.table.rows.push_back({"mimo_1x1_equivalence", unit_ok ? "pass" : "fail", "bitwise", 15.0, 0.3,
                              "1x1", nullptr, nullptr, nullptr, nullptr, 0, "SISO vs MIMO(1,1) sweep and simulation"});

    if (!quick) {
        ValidationOptions info = opt;
        info.gating = false;
        add("fixed_8psk_approx", 15.0, 0.1, "siso",
            validate_point(15.0, TurbulenceParams(0.1), FixedTarget{ModOrder(8)}, spec.tolerance, info));
        add("adaptive_mimo_2x2_approx", 15.0, 0.3, "2x2",
            validate_point(15.0, MimoConfig(0.3, 2, 2), AdaptiveTarget{5, 1e-3}, spec.tolerance, info));
    }
    return out;
}

} // namespace fsoam::cli
