#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "pdce/analytic.hpp"
#include "pdce/scenario.hpp"

using namespace pdce;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("pdce_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Scenario small(HamiltonianKind k, double c_k, double c_eps, bool kappa_on, double t_end, int dim) {
    Scenario s;
    s.name = "small";
    s.hamiltonian = k;
    s.params.c_k = c_k;
    s.params.c_eps_tilde = c_eps;
    s.params.dim = dim;
    s.kappa_on = kappa_on;
    s.t_end = t_end;
    s.n_samples = 41;
    return s;
}

RunOptions quick() {
    RunOptions o;
    o.check_convergence = false;
    return o;
}

}  // namespace

TEST_CASE("built-in scenario list") {
    std::vector<std::string> names;
    for (const auto& s : builtin_scenarios()) {
        names.push_back(s.name);
        CHECK_NOTHROW(s.validate());
    }
    CHECK(names.size() == 27);
    for (const char* n : {"fig2a", "fig2d", "fig3a", "fig3b", "fig4c", "fig5b", "fig6a", "fig6h",
                          "fig7a", "fig7d", "fig8a", "fig8d"})
        CHECK(find_builtin(n).has_value());
    CHECK_FALSE(find_builtin("fig1").has_value());
    CHECK(find_builtin("fig7c")->kappa_on == false);
    CHECK(find_builtin("fig7c")->wigner_times.size() == 1);
    CHECK(find_builtin("fig7c")->wigner_times[0] == doctest::Approx(std::numbers::pi / 2e-3));
    CHECK(builtin_sweep_names() == std::vector<std::string>{"fig9"});
}

TEST_CASE("weak-coupling scenario tables") {
    auto s = *find_builtin("fig3a");
    s.t_end = 10.0;
    s.n_samples = 101;
    s.params.dim = 32;
    const auto r = compute_scenario(s);
    REQUIRE(r.tables.count("n") == 1);
    const Table& t = r.tables.at("n");
    CHECK(t.names == std::vector<std::string>{"s", "n_numeric", "n_numeric_lossless", "n_analytic"});
    CHECK(t.rows() == 101);
    CHECK(t.col("s").back() == 10.0);
    CHECK(t.col("n_numeric")[0] == 0.0);
    // inside the validity window the lossless run follows the closed form
    const auto& nl = t.col("n_numeric_lossless");
    const auto& na = t.col("n_analytic");
    for (std::size_t i = 1; i < t.rows(); ++i) CHECK(std::abs(nl[i] - na[i]) < 0.05 * na[i] + 1e-3);
    // decay lowers the photon number
    CHECK(t.col("n_numeric").back() < nl.back());
    REQUIRE(r.convergence.size() == 2);
    for (const auto& c : r.convergence) CHECK(c.passed);
    const auto& m = r.manifest;
    CHECK(m.at("schema_version") == kSchemaVersion);
    CHECK(m.at("dissipator_note") == kDissipatorNote);
    CHECK(m.at("derived").at("branch") == "hyperbolic");
    CHECK(m.at("runs").at("numeric").at("integrator") == "master");
    CHECK(m.at("runs").at("numeric_lossless").at("integrator") == "schrodinger");
    CHECK(m.at("invariants").at("riccati_residual_max").get<double>() <= 1e-8);
    CHECK(m.at("invariants").at("max_trace_error").get<double>() <= 1e-9);
    CHECK(m.at("summary").contains("analytic"));
}

TEST_CASE("zero duration is rejected without leaving files") {
    TempDir tmp("zero");
    auto s = small(HamiltonianKind::wcr, 1e-3, 0.02, true, 0.0, 16);
    CHECK_THROWS_AS(compute_scenario(s), DomainError);
    CHECK_THROWS_AS(run_scenario(s, tmp.path.string()), DomainError);
    CHECK(fs::is_empty(tmp.path));
}

TEST_CASE("a failing run leaves no output directory") {
    TempDir tmp("overflow");
    auto s = small(HamiltonianKind::wcr, 0.0, 0.1, false, 200.0, 6);
    s.name = "overflow";
    CHECK_THROWS_AS(run_scenario(s, tmp.path.string(), quick()), TruncationOverflow);
    CHECK(fs::is_empty(tmp.path));
}

TEST_CASE("Kerr-only evolution from vacuum stays empty") {
    auto s = small(HamiltonianKind::dce, 0.1, 0.0, true, 20.0, 8);
    s.params.c_e = 0.0;
    const auto reports = convergence_check(s);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].max_rel_deviation == 0.0);
    CHECK(reports[0].passed);
}

TEST_CASE("oscillatory branch converges at a small truncation") {
    auto s = small(HamiltonianKind::wcr, 0.1, 0.05, false, 80.0, 16);
    s.params.c_e = 0.0;
    const auto r = convergence_check(s);
    REQUIRE(r.size() == 1);
    CHECK(r[0].dim == 16);
    CHECK(r[0].dim_doubled == 32);
    CHECK(r[0].passed);
}

TEST_CASE("Wigner snapshot files") {
    TempDir tmp("wigner");
    auto s = *find_builtin("fig7b");
    s.wigner_points = 51;
    const auto m = run_scenario(s, tmp.path.string(), quick());
    const fs::path dir = tmp.path / "fig7b";
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "n.csv"));
    CHECK_FALSE(fs::exists(tmp.path / "fig7b.partial"));
    REQUIRE(m.at("files").contains("wigner"));
    const auto f = m.at("files").at("wigner").at(0).at("file").get<std::string>();
    const std::string text = slurp(dir / f);
    CHECK(text.rfind("x\\p,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 52);
    CHECK(text.find('\r') == std::string::npos);
    const auto saved = json::parse(slurp(dir / "manifest.json"));
    CHECK(saved.at("name") == "fig7b");
    const auto& w = saved.at("summary").at("numeric").at("wigner").at(0);
    CHECK(w.at("s").get<double>() == doctest::Approx(*s.tau_s()));
    CHECK(w.at("integral").get<double>() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(w.at("negativity").get<double>() > 0.1);
}

TEST_CASE("config JSON round trip and units") {
    for (const auto& b : builtin_scenarios()) {
        const Scenario s = scenario_from_json(scenario_to_json(b));
        CHECK(scenario_to_json(s) == scenario_to_json(b));
    }
    const json j = {{"schema_version", 1},
                    {"name", "custom"},
                    {"hamiltonian", "wcr"},
                    {"params",
                     {{"kappa_hz_over_2pi", 50e3},
                      {"delta_bar_rad_per_s", 2.0 * std::numbers::pi * 5e6},
                      {"c_k", 0.05},
                      {"c_eps_tilde", 0.02},
                      {"dim", 24}}},
                    {"time_grid", {{"t_end", 2e-6}, {"units", "seconds"}, {"n_samples", 11}}},
                    {"observables", {"q_mandel", "squeezing_db"}},
                    {"wigner_times", {"tau"}}};
    const Scenario s = scenario_from_json(j);
    CHECK(s.hamiltonian == HamiltonianKind::wcr);
    CHECK(s.params.kappa == doctest::Approx(2.0 * std::numbers::pi * 50e3));
    CHECK(s.params.delta_bar == doctest::Approx(2.0 * std::numbers::pi * 5e6));
    CHECK(s.t_end == doctest::Approx(2e-6 * s.params.delta_bar));
    CHECK(s.observables.n);
    CHECK(s.observables.mandel_q);
    CHECK_FALSE(s.observables.variances);
    CHECK(s.wigner_times.size() == 1);

    const json t = {{"schema_version", 1}, {"template", "fig2a"}, {"name", "short"},
                    {"time_grid", {{"t_end", 5.0}}}};
    const Scenario ts = scenario_from_json(t);
    CHECK(ts.name == "short");
    CHECK(ts.params.c_k == 0.05);
    CHECK(ts.t_end == 5.0);
}

TEST_CASE("config JSON errors") {
    CHECK_THROWS_AS(scenario_from_json(json{{"name", "x"}}), DomainError);
    CHECK_THROWS_AS(scenario_from_json(json{{"schema_version", 2}, {"template", "fig2a"}}), DomainError);
    CHECK_THROWS_AS(scenario_from_json(json{{"schema_version", 1}, {"template", "nope"}}), DomainError);
    CHECK_THROWS_AS(scenario_from_json(json{{"schema_version", 1},
                                            {"template", "fig2a"},
                                            {"observables", {"photons"}}}),
                    DomainError);
    CHECK_THROWS_AS(
        scenario_from_json(json{{"schema_version", 1},
                                {"template", "fig2a"},
                                {"params", {{"kappa_hz_over_2pi", 1.0}, {"kappa_rad_per_s", 1.0}}}}),
        DomainError);
    CHECK_THROWS_AS(scenario_from_json(json{{"schema_version", 1},
                                            {"template", "fig2a"},
                                            {"time_grid", {{"units", "fortnights"}}}}),
                    DomainError);
    CHECK_THROWS_AS(scenario_from_json(json{{"schema_version", 1},
                                            {"template", "fig2a"},
                                            {"params", {{"c_k", 0.0}}},
                                            {"wigner_times", {"tau"}}}),
                    DomainError);
}

TEST_CASE("single-cell sweep reproduces the scenario summary") {
    auto s = small(HamiltonianKind::dce, 0.05, 0.1, true, 15.0, 16);
    s.observables.mandel_q = true;
    const json cfg = {{"schema_version", 1},
                      {"name", "one"},
                      {"template", scenario_to_json(s)},
                      {"grid", {{"c_k", {0.05}}}}};
    const auto r = sweep(cfg, 1);
    REQUIRE(r.status.size() == 1);
    CHECK(r.status[0] == "ok");
    const auto direct = compute_scenario(s, quick()).manifest.at("summary").at("numeric");
    CHECK(r.numeric.col("max_n")[0] == direct.at("max_n").get<double>());
    CHECK(r.numeric.col("final_n")[0] == direct.at("final_n").get<double>());
    CHECK(r.numeric.col("min_mandel_q")[0] == direct.at("min_mandel_q").get<double>());
}

TEST_CASE("sweep across the branch boundary") {
    TempDir tmp("sweep");
    auto s = small(HamiltonianKind::wcr, 0.0, 0.0, false, 5.0, 12);
    s.params.c_e = 0.0;
    const json cfg = {{"schema_version", 1},
                      {"name", "branches"},
                      {"template", scenario_to_json(s)},
                      {"grid", json::array({{{"name", "c_k"}, {"values", {0.02, 0.05, 0.1}}},
                                            {{"name", "c_eps_tilde"}, {"values", {0.03, 0.06, 0.09}}}})}};
    const auto r = sweep(cfg, 2);
    REQUIRE(r.status.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(r.status[i] == "ok");
        const double ck = r.numeric.col("c_k")[i], ce = r.numeric.col("c_eps_tilde")[i];
        CHECK(r.numeric.col("index_c_k")[i] == static_cast<double>(i / 3));
        CHECK(r.branch[i] == (ck < ce ? "hyperbolic" : "oscillatory"));
    }
    const auto serial = sweep(cfg, 1);
    CHECK(serial.numeric.cols == r.numeric.cols);

    const auto m = run_sweep(cfg, tmp.path.string(), 2);
    CHECK(m.at("rows") == 9);
    CHECK(m.at("failed_rows") == 0);
    const std::string csv = slurp(tmp.path / "branches" / "sweep.csv");
    CHECK(csv.rfind("index_c_k,c_k,index_c_eps_tilde,c_eps_tilde,max_n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
    CHECK(json::parse(slurp(tmp.path / "branches" / "manifest.json")).at("dissipator_note") ==
          kDissipatorNote);
}

TEST_CASE("failed sweep rows are recorded, not fatal") {
    auto s = small(HamiltonianKind::wcr, 0.0, 0.1, false, 200.0, 6);
    const json cfg = {{"schema_version", 1},
                      {"template", scenario_to_json(s)},
                      {"grid", {{"t_end", {1.0, 200.0}}}}};
    const auto r = sweep(cfg, 1);
    REQUIRE(r.status.size() == 2);
    CHECK(r.status[0] == "ok");
    CHECK(r.status[1].rfind("error:truncation_overflow", 0) == 0);
    CHECK(std::isnan(r.numeric.col("max_n")[1]));
}

TEST_CASE("calibration sweep") {
    json cfg = *find_builtin_sweep("fig9");
    cfg["grid"] = json::array({{{"name", "temperature_k"}, {"values", {0.001, 0.01, 0.05}}},
                               {{"name", "p_in_ratio"}, {"values", {1e-6, 1.0}}}});
    const auto r = sweep(cfg, 1);
    REQUIRE(r.status.size() == 6);
    const auto& ratio = r.numeric.col("ratio_to_reference");
    const auto& closed = r.numeric.col("ratio_closed_form");
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(r.status[i] == "ok");
        CHECK(ratio[i] == doctest::Approx(closed[i]).epsilon(1e-10));
    }
    // reference temperature at full pump power
    CHECK(ratio[3] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.numeric.col("g0_hz_over_2pi")[3] == doctest::Approx(106.0).epsilon(1e-12));
    // colder mechanics or weaker pumping both inflate the inferred coupling
    CHECK(ratio[0] > ratio[1]);
    CHECK(ratio[2] > ratio[3]);

    REQUIRE(r.contour.has_value());
    const auto& pc = r.contour->col("p_in_ratio_at_target");
    REQUIRE(pc.size() == 3);
    json at = cfg;
    for (std::size_t k = 0; k < 3; ++k) {
        at["grid"] = json::array({{{"name", "temperature_k"}, {"values", {r.contour->col("temperature_k")[k]}}},
                                  {{"name", "p_in_ratio"}, {"values", {pc[k]}}}});
        CHECK(sweep(at, 1).numeric.col("ratio_to_reference")[0] == doctest::Approx(1e3).epsilon(1e-10));
    }
    CHECK_THROWS_AS(sweep(json{{"kind", "calibration_sweep"}}, 1), DomainError);
}

TEST_CASE("fixed-step output is byte identical") {
    TempDir a("fixed_a"), b("fixed_b");
    auto s = small(HamiltonianKind::dce, 0.05, 0.1, true, 10.0, 16);
    s.name = "fixed";
    s.observables.variances = true;
    RunOptions o = quick();
    o.fixed_step = true;
    run_scenario(s, a.path.string(), o);
    run_scenario(s, b.path.string(), o);
    for (const char* f : {"n.csv", "variances.csv"})
        CHECK(slurp(a.path / "fixed" / f) == slurp(b.path / "fixed" / f));
}

TEST_CASE("CSV formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
    TempDir tmp("csv");
    Table t;
    t.add("a", {1.0, 2.5});
    t.add("b", {-3.0, 1e-20});
    CHECK_THROWS_AS(t.add("c", {1.0}), DimensionMismatch);
    const std::vector<std::string> text = {"ok", "bad, value"};
    write_table_csv((tmp.path / "t.csv").string(), t, {{"status", &text}});
    CHECK(slurp(tmp.path / "t.csv") == "a,b,status\n1,-3,ok\n2.5,9.9999999999999995e-21,bad  value\n");
}
