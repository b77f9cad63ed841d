#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdarwin/cli.hpp"
#include "qdarwin/info.hpp"
#include "qdarwin/table.hpp"

using qdarwin::info::kLn2;
namespace cli = qdarwin::cli;
namespace table = qdarwin::table;

namespace {

const std::string kDustGrain =
    std::string(QDARWIN_SCENARIO_DIR) + "/dust-grain.json";

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "qdarwin");
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code =
        cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t col(const table::OutputTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return i;
    REQUIRE_MESSAGE(false, "missing column ", name);
    return 0;
}

double cell(const table::OutputTable& t, std::size_t row, const std::string& c) {
    const auto v = t.rows.at(row).at(col(t, c));
    REQUIRE(v.has_value());
    return *v;
}

// Scenario whose separation sits right at the thermal peak wavelength, where
// both rate expansions are shaky and the CLI must warn.
const char* kCrossoverJson = R"({
    "radius_m": 5e-7, "epsilon": 4, "separation_m": 1e-6,
    "temperature_K": 5800, "irradiance_W_m2": 1361,
    "theta_rad": 0, "illumination": "point"
})";

struct TempFile {
    std::string path;
    TempFile(std::string p, const std::string& content) : path(std::move(p)) {
        std::ofstream f(path, std::ios::binary);
        f << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("usage errors exit 2 with a message on stderr") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {},
             {"frobnicate"},
             {"pip"},  // no decoherence source
             {"pip", "--gamma-exponent", "1", "--scenario", "x.json"},
             {"decohere", "--gamma-exponent", "1", "--times", "1e-3"},
             {"decohere", "--scenario", "/nonexistent.json", "--times", "1"},
             {"pip", "--gamma-exponent", "0:1:-0.5"},
             {"pip", "--gamma-exponent", "1:0:0.1"},
             {"pip", "--gamma-exponent", "abc"},
             {"pip", "--gamma-exponent", "1", "--fractions", "0:1"},
             {"pip", "--gamma-exponent", "1", "--format", "xml"},
             {"redundancy", "--gamma-exponent", "1", "--delta", "1.5"},
             {"scenario", "--scenario", kDustGrain},  // missing --time
             {"scenario", "--gamma-exponent", "1", "--scenario", kDustGrain,
              "--time", "1"},
             {"validate", "--max-n", "99"},
             {"validate", "--tolerance", "-1"},
         }) {
        CAPTURE(args.empty() ? std::string("<none>") : args[0]);
        const auto r = run_cli(args);
        CHECK(r.code == cli::kExitUsage);
        CHECK_FALSE(r.err.empty());
    }
}

TEST_CASE("help is not an error") {
    const auto top = run_cli({"--help"});
    CHECK(top.code == cli::kExitOk);
    CHECK(top.out.find("pip") != std::string::npos);
    CHECK(top.out.find("redundancy") != std::string::npos);
    const auto sub = run_cli({"pip", "--help"});
    CHECK(sub.code == cli::kExitOk);
    CHECK(sub.out.find("--fractions") != std::string::npos);
}

TEST_CASE("decohere: frozen entropies over a time list") {
    const auto r = run_cli({"decohere", "--gamma-exponent", "0,1,4"});
    REQUIRE(r.code == cli::kExitOk);
    const auto t = table::from_csv(r.out);
    CHECK(t.columns == std::vector<std::string>{"t_over_tau", "gamma",
                                                "entropy_nats", "entropy_bits"});
    REQUIRE(t.rows.size() == 3);
    CHECK(cell(t, 0, "gamma") == 1.0);
    CHECK(cell(t, 0, "entropy_nats") == 0.0);
    CHECK(cell(t, 1, "gamma") == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(std::abs(cell(t, 1, "entropy_nats") - 0.4958422580214430564861) < 1e-14);
    CHECK(std::abs(cell(t, 2, "entropy_nats") - 0.6839611990567596529799) < 1e-14);
    CHECK(cell(t, 2, "entropy_bits") == cell(t, 2, "entropy_nats") / kLn2);
    CHECK(t.metadata.at("source") == "gamma-exponent");
    CHECK(t.metadata.at("formula_version") == "1");
    // grid syntax: endpoints inclusive
    const auto g = run_cli({"decohere", "--gamma-exponent", "0:30:10"});
    REQUIRE(g.code == cli::kExitOk);
    const auto gt = table::from_csv(g.out);
    REQUIRE(gt.rows.size() == 4);
    CHECK(cell(gt, 3, "t_over_tau") == 30.0);
}

TEST_CASE("pip: identities hold in the emitted table") {
    const auto r = run_cli(
        {"pip", "--gamma-exponent", "3", "--fractions", "0:1:0.1"});
    REQUIRE(r.code == cli::kExitOk);
    const auto t = table::from_csv(r.out);
    REQUIRE(t.rows.size() == 11);
    CHECK(t.metadata.at("illumination") == "point");
    const auto h = run_cli({"decohere", "--gamma-exponent", "3"});
    const double hs = cell(table::from_csv(h.out), 0, "entropy_nats");
    CHECK(cell(t, 0, "info_nats") == 0.0);
    CHECK(std::abs(cell(t, 5, "info_nats") - hs) < 1e-15);
    CHECK(std::abs(cell(t, 10, "info_nats") - 2.0 * hs) < 1e-15);
    // antisymmetry about f = 1/2 as seen by a consumer of the CSV
    CHECK(std::abs(cell(t, 2, "info_nats") + cell(t, 8, "info_nats") -
                   2.0 * hs) < 1e-12);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        CHECK(cell(t, i, "info_bits") == cell(t, i, "info_nats") / kLn2);
}

TEST_CASE("pip: isotropic curves stay below the branch entropy") {
    const auto r = run_cli({"pip", "--gamma-exponent", "3", "--illumination",
                            "isotropic", "--fractions", "0,0.5,0.9,1"});
    REQUIRE(r.code == cli::kExitOk);
    const auto t = table::from_csv(r.out);
    CHECK(t.metadata.at("illumination") == "isotropic");
    const double hs = 0.66804285679778727;  // H at t/tau = 3
    CHECK(cell(t, 0, "info_nats") == 0.0);
    CHECK(cell(t, 1, "info_nats") > 0.0);
    CHECK(cell(t, 1, "info_nats") < 0.5 * hs);
    CHECK(std::abs(cell(t, 3, "info_nats") - hs) < 1e-12);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        CHECK(cell(t, i, "info_nats") <= hs + 1e-15);
}

TEST_CASE("redundancy: frozen values and asymptotic-column rules") {
    const auto r = run_cli(
        {"redundancy", "--gamma-exponent", "100", "--delta", "0.1"});
    REQUIRE(r.code == cli::kExitOk);
    const auto t = table::from_csv(r.out);
    REQUIRE(t.rows.size() == 1);
    CHECK(cell(t, 0, "f_delta") ==
          doctest::Approx(0.019995549788084212).epsilon(1e-9));
    CHECK(cell(t, 0, "redundancy") ==
          doctest::Approx(50.0111280058886903).epsilon(1e-9));
    CHECK(cell(t, 0, "redundancy_asymptotic") ==
          doctest::Approx(50.6085466951505728).epsilon(1e-12));
    CHECK(cell(t, 0, "has_plateau") == 1.0);

    // before anything scatters: no fragment suffices, redundancy zero
    const auto z = run_cli({"redundancy", "--gamma-exponent", "0"});
    const auto zt = table::from_csv(z.out);
    CHECK_FALSE(zt.rows.at(0).at(col(zt, "f_delta")).has_value());
    CHECK(cell(zt, 0, "redundancy") == 0.0);
    CHECK(cell(zt, 0, "redundancy_asymptotic") == 0.0);
    CHECK(cell(zt, 0, "has_plateau") == 0.0);

    // past 2 delta ln2 = 1 the large-time column is undefined: empty cells
    const auto b = run_cli(
        {"redundancy", "--gamma-exponent", "0:100:50", "--delta", "0.8"});
    REQUIRE(b.code == cli::kExitOk);
    CHECK(b.err.find("warning") != std::string::npos);
    const auto bt = table::from_csv(b.out);
    REQUIRE(bt.rows.size() == 3);
    for (std::size_t i = 0; i < bt.rows.size(); ++i)
        CHECK_FALSE(bt.rows.at(i).at(col(bt, "redundancy_asymptotic")).has_value());
    CHECK(cell(bt, 2, "has_plateau") == 1.0);
}

TEST_CASE("scenario: bundled dust grain in sunlight") {
    const auto txt = run_cli(
        {"scenario", "--scenario", kDustGrain, "--time", "1e-6"});
    REQUIRE(txt.code == cli::kExitOk);
    CHECK(txt.out.find("saturated") != std::string::npos);
    CHECK(txt.out.find("redundancy") != std::string::npos);
    CHECK(txt.out.find("scenario 0x") != std::string::npos);

    const auto js = run_cli({"scenario", "--scenario", kDustGrain, "--time",
                             "1e-6", "--format", "json"});
    REQUIRE(js.code == cli::kExitOk);
    const auto j = nlohmann::json::parse(js.out);
    CHECK(j.at("derived").at("regime_used") == "saturated");
    CHECK(j.at("derived").at("decoheres") == true);
    CHECK(j.at("derived").contains("tau_d_s"));
    CHECK(j.at("at_time").at("t_over_tau").get<double>() ==
          doctest::Approx(20351850.98320320406).epsilon(1e-9));
    CHECK(j.at("at_time").at("entropy_bits").get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j.at("at_time").at("redundancy").get<double>() ==
          doctest::Approx(1.01781902e7).epsilon(1e-4));
    CHECK(j.at("at_time").at("has_plateau") == true);
    CHECK(j.at("scenario_hash").get<std::string>().substr(0, 2) == "0x");

    // nothing recorded yet at t = 0
    const auto z = run_cli({"scenario", "--scenario", kDustGrain, "--time", "0",
                            "--format", "json"});
    const auto zj = nlohmann::json::parse(z.out);
    CHECK(zj.at("at_time").at("gamma") == 1.0);
    CHECK(zj.at("at_time").at("redundancy") == 0.0);
    CHECK(zj.at("at_time").at("has_plateau") == false);
}

TEST_CASE("pip driven by a scenario keeps physical time in the table") {
    const auto r = run_cli({"pip", "--scenario", kDustGrain, "--times", "1e-6",
                            "--fractions", "0:1:0.25"});
    REQUIRE(r.code == cli::kExitOk);
    const auto t = table::from_csv(r.out);
    REQUIRE(t.rows.size() == 5);
    CHECK(t.columns.at(0) == "t_s");
    CHECK(cell(t, 0, "t_s") == 1e-6);
    CHECK(t.metadata.at("source") == "scenario");
    CHECK(t.metadata.at("regime_used") == "saturated");
    CHECK(t.metadata.count("scenario_hash") == 1);
    CHECK(t.metadata.count("tau_d_s") == 1);
    CHECK(t.metadata.at("illumination") == "point");  // scenario's own value
    // deep decoherence: the curve is the full classical plateau
    CHECK(std::abs(cell(t, 2, "info_nats") - kLn2) < 1e-12);
    CHECK(std::abs(cell(t, 4, "info_nats") - 2.0 * kLn2) < 1e-12);
    const auto iso = run_cli({"pip", "--scenario", kDustGrain, "--times",
                              "1e-6", "--illumination", "isotropic"});
    CHECK(table::from_csv(iso.out).metadata.at("illumination") == "isotropic");
}

TEST_CASE("regime crossover warns, and --strict escalates to exit 3") {
    const TempFile f("tmp_cli_crossover.json", kCrossoverJson);
    const auto soft = run_cli(
        {"decohere", "--scenario", f.path, "--times", "1e-9"});
    CHECK(soft.code == cli::kExitOk);
    CHECK(soft.err.find("warning") != std::string::npos);
    const auto hard = run_cli(
        {"decohere", "--scenario", f.path, "--times", "1e-9", "--strict"});
    CHECK(hard.code == cli::kExitRegime);
    CHECK(hard.err.find("regime error") != std::string::npos);
}

TEST_CASE("--output writes the same bytes the stream would get") {
    const std::string path = "tmp_cli_out.csv";
    const auto direct = run_cli({"decohere", "--gamma-exponent", "1,2"});
    const auto filed = run_cli(
        {"decohere", "--gamma-exponent", "1,2", "--output", path});
    REQUIRE(filed.code == cli::kExitOk);
    CHECK(filed.out.empty());
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == direct.out);
    std::remove(path.c_str());
}

TEST_CASE("csv and json formats carry identical values") {
    const std::vector<std::string> base{"redundancy", "--gamma-exponent",
                                        "0,1,100", "--delta", "0.3"};
    auto csv_args = base;
    auto json_args = base;
    json_args.insert(json_args.end(), {"--format", "json"});
    const auto tc = table::from_csv(run_cli(csv_args).out);
    const auto tj = table::from_json(run_cli(json_args).out);
    CHECK(tc.columns == tj.columns);
    CHECK(tc.metadata == tj.metadata);
    REQUIRE(tc.rows.size() == tj.rows.size());
    for (std::size_t i = 0; i < tc.rows.size(); ++i)
        for (std::size_t k = 0; k < tc.columns.size(); ++k) {
            CHECK(tc.rows[i][k].has_value() == tj.rows[i][k].has_value());
            if (tc.rows[i][k].has_value())
                CHECK(*tc.rows[i][k] == *tj.rows[i][k]);
        }
}

TEST_CASE("validate: self checks pass, absurd tolerance fails honestly") {
    const auto ok = run_cli({"validate", "--max-n", "3", "--tolerance", "1e-8"});
    CHECK(ok.code == cli::kExitOk);
    CHECK(ok.out.find("MISMATCH") == std::string::npos);
    const auto bad = run_cli(
        {"validate", "--max-n", "2", "--tolerance", "1e-30"});
    CHECK(bad.code == cli::kExitValidation);
    CHECK(bad.out.find("MISMATCH") != std::string::npos);
    const auto js = run_cli({"validate", "--max-n", "2", "--tolerance", "1e-8",
                             "--format", "json"});
    CHECK(js.code == cli::kExitOk);
    const auto j = nlohmann::json::parse(js.out);
    CHECK(j.at("ok") == true);
    CHECK(j.at("checks").size() == 9);
    for (const auto& c : j.at("checks")) CHECK(c.at("ok") == true);
}

TEST_CASE("output bytes do not depend on the worker thread count") {
    setenv("QDARWIN_THREADS", "1", 1);
    const auto serial = run_cli(
        {"pip", "--gamma-exponent", "5", "--fractions", "0:1:0.001"});
    setenv("QDARWIN_THREADS", "5", 1);
    const auto threaded = run_cli(
        {"pip", "--gamma-exponent", "5", "--fractions", "0:1:0.001"});
    unsetenv("QDARWIN_THREADS");
    CHECK(serial.code == cli::kExitOk);
    CHECK(serial.out == threaded.out);
}
