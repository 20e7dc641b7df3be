#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "fsoam/cli.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace fsoam;
using namespace fsoam::cli;

namespace {

std::string render(const Table& t, Format f) {
    std::ostringstream os;
    write_table(t, f, os);
    return os.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

SweepSpec spec_for(Command c, const std::string& snr) {
    SweepSpec s;
    s.command = c;
    s.snr = parse_snr_range(snr);
    return s;
}

} // namespace

TEST_CASE("parse_snr_range and snr_grid", "[cli][parse]") {
    const auto r = parse_snr_range("0:30:0.5");
    CHECK(r.start == 0.0);
    CHECK(r.stop == 30.0);
    CHECK(r.step == 0.5);
    const auto g = snr_grid(r);
    REQUIRE(g.size() == 61);
    CHECK(g.back() == 30.0);
    CHECK(snr_grid(parse_snr_range("5:5:1")).size() == 1);
    CHECK(snr_grid(parse_snr_range("0:1:0.1")).size() == 11);
    CHECK_THROWS_AS(parse_snr_range("0:30"), ConfigError);
    CHECK_THROWS_AS(parse_snr_range("0:30:1x"), ConfigError);
    CHECK_THROWS_AS(snr_grid(parse_snr_range("0:30:0")), ConfigError);
    CHECK_THROWS_AS(snr_grid(parse_snr_range("10:0:1")), ConfigError);
}

TEST_CASE("parse_mimo", "[cli][parse]") {
    CHECK(parse_mimo("2x2") == std::pair{2, 2});
    CHECK(parse_mimo("1x4") == std::pair{1, 4});
    CHECK_THROWS_AS(parse_mimo("2"), ConfigError);
    CHECK_THROWS_AS(parse_mimo("0x2"), ConfigError);
    CHECK_THROWS_AS(parse_mimo("2x2x2"), ConfigError);
}

TEST_CASE("format_double uses 17 significant digits", "[cli][format]") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("CSV quoting", "[cli][format]") {
    Table t;
    t.columns = {"a", "b"};
    t.rows.push_back({std::string("x,y"), std::string("say \"hi\"")});
    CHECK(render(t, Format::csv) == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
}

TEST_CASE("spectral: columns and content", "[cli][spectral]") {
    SweepSpec s = spec_for(Command::spectral, "0:30:0.5");
    s.sigma_x = 0.5;
    const Table t = cmd_spectral(s);
    CHECK(t.columns == std::vector<std::string>{"snr_db", "S_adaptive", "S_capacity_upper",
                                                 "S_bpsk_nonadaptive", "outage_prob"});
    REQUIRE(t.rows.size() == 61);
    const std::string csv = render(t, Format::csv);
    CHECK(first_line(csv) == "snr_db,S_adaptive,S_capacity_upper,S_bpsk_nonadaptive,outage_prob");
    double prev = 0.0;
    for (const auto& row : t.rows) {
        const double sa = row[1].get<double>();
        CHECK(sa >= prev);
        CHECK(sa <= 2.5);
        prev = sa;
    }
    const auto direct = compute_boundaries(5, 1e-3, LinkBudget::from_db(15.0));
    CHECK(t.rows[30][1].get<double>() == spectral_efficiency(direct, TurbulenceParams(0.5)));
    CHECK(render(cmd_spectral(s), Format::csv) == csv);
}

TEST_CASE("spectral: MIMO flag and caveats", "[cli][spectral]") {
    SweepSpec s = spec_for(Command::spectral, "0:20:5");
    s.mimo = true;
    s.mimo_f = 2;
    s.mimo_l = 2;
    const Table t = cmd_spectral(s);
    CHECK(t.metadata["spec"]["mimo"] == "2x2");
    bool extrapolated = false;
    for (const auto& n : t.notes) extrapolated = extrapolated || n.find("extrapolated") != std::string::npos;
    CHECK(extrapolated);
}

TEST_CASE("ber: columns and guarantee", "[cli][ber]") {
    SweepSpec s = spec_for(Command::ber, "0:30:1");
    s.p_o = 1e-2;
    const Table t = cmd_ber(s);
    CHECK(t.columns == std::vector<std::string>{"snr_db", "ber_adaptive", "ber_fixed_2", "ber_fixed_4",
                                                 "ber_fixed_8", "ber_fixed_16", "ber_fixed_32",
                                                 "p_o_reference"});
    for (const auto& row : t.rows) {
        CHECK(row[1].get<double>() <= 1e-2);
        CHECK(row.back().get<double>() == 1e-2);
    }
}

TEST_CASE("thresholds: dropped orders are nan", "[cli][thresholds]") {
    SweepSpec s = spec_for(Command::thresholds, "10:10:1");
    s.p_o = 0.4;
    s.n_orders = 6;
    const Table t = cmd_thresholds(s);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.columns.size() == 7);
    CHECK(std::isnan(t.rows[0][6].get<double>()));
    CHECK_FALSE(t.notes.empty());

    s.p_o = 1e-3;
    s.n_orders = 5;
    const Table ok = cmd_thresholds(s);
    CHECK_THAT(ok.rows[0][1].get<double>(), WithinRel(0.690996950285717371, 1e-14));
}

TEST_CASE("capacity: closed and numeric columns agree", "[cli][capacity]") {
    const Table t = cmd_capacity(spec_for(Command::capacity, "10:25:5"));
    REQUIRE(t.rows.size() == 4);
    for (const auto& row : t.rows) {
        CHECK_THAT(row[2].get<double>(), WithinRel(row[1].get<double>(), 1e-9));
    }
    CHECK(t.notes.empty());
    CHECK_FALSE(cmd_capacity(spec_for(Command::capacity, "0:5:5")).notes.empty());
}

TEST_CASE("simulate: deterministic single row", "[cli][simulate]") {
    SweepSpec s = spec_for(Command::simulate, "0:30:0.5");
    s.snr_db = 15.0;
    s.symbols = 200'000;
    s.block_size = 4;
    s.seed = 42;
    const Table a = cmd_simulate(s);
    REQUIRE(a.rows.size() == 1);
    CHECK(a.columns.back() == "blocks_M32");
    CHECK(a.rows[0][2].get<std::uint64_t>() == 200'000);
    s.workers = 3;
    CHECK(render(cmd_simulate(s), Format::csv) == render(a, Format::csv));
    CHECK(render(cmd_simulate(s), Format::json) == render(a, Format::json));

    s.mode = "fixed";
    s.order = 8;
    const Table f = cmd_simulate(s);
    CHECK(f.columns.back() == "blocks_M8");
    s.order = 6;
    CHECK_THROWS_AS(cmd_simulate(s), ConfigError);
    s.mode = "other";
    CHECK_THROWS_AS(cmd_simulate(s), ConfigError);
    s.mode = "fixed";
    s.order = 2;
    s.symbols = 3;
    CHECK_THROWS_AS(cmd_simulate(s), ConfigError);
}

TEST_CASE("JSON mirrors CSV with a metadata envelope", "[cli][format]") {
    SweepSpec s = spec_for(Command::thresholds, "0:2:1");
    s.seed = 7;
    const Table t = cmd_thresholds(s);
    const Json doc = Json::parse(render(t, Format::json));
    CHECK(doc["metadata"]["tool"] == "fsoam");
    CHECK(doc["metadata"]["version"] == kToolVersion);
    CHECK(doc["metadata"]["seed"] == 7);
    CHECK(doc["metadata"]["spec"]["command"] == "thresholds");
    CHECK(doc["columns"].size() == t.columns.size());
    REQUIRE(doc["rows"].size() == 3);
    CHECK(doc["rows"][1]["snr_db"] == 1.0);
    CHECK(doc["rows"][1]["I_1"].get<double>() == t.rows[1][1].get<double>());

    Table with_nan;
    with_nan.columns = {"v"};
    with_nan.rows.push_back({std::nan("")});
    CHECK(Json::parse(render(with_nan, Format::json))["rows"][0]["v"].is_null());
}

TEST_CASE("MIMO (1,1) equivalence check", "[cli][validate]") {
    CHECK(mimo_unit_equivalence(0.3, 1e-3, 5, 11, 2));
    CHECK(mimo_unit_equivalence(0.5, 1e-2, 3, 12, 1));
}

TEST_CASE("validate: argument errors", "[cli][validate]") {
    SweepSpec s = spec_for(Command::validate, "0:30:0.5");
    s.tolerance = 0.0;
    CHECK_THROWS_AS(cmd_validate(s), ConfigError);
    s.tolerance = 0.05;
    s.grid = "huge";
    CHECK_THROWS_AS(cmd_validate(s), ConfigError);
}

TEST_CASE("validate: quick grid passes", "[cli][validate]") {
    SweepSpec s = spec_for(Command::validate, "0:30:0.5");
    s.grid = "quick";
    const ValidationOutcome out = cmd_validate(s);
    CHECK(out.all_passed);
    CHECK(out.table.rows.size() == 3);
    for (const auto& row : out.table.rows) CHECK(row[1] == "pass");
}
