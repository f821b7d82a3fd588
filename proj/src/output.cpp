#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

#include "pdce/scenario.hpp"

namespace pdce {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_table_csv(
    const std::string& path, const Table& t,
    const std::vector<std::pair<std::string, const std::vector<std::string>*>>& text_cols) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    std::string line;
    for (std::size_t c = 0; c < t.names.size(); ++c) line += (c ? "," : "") + t.names[c];
    for (const auto& [name, _] : text_cols) line += (line.empty() ? "" : ",") + name;
    f << line << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < t.cols.size(); ++c)
            line += (c ? "," : "") + format_double(t.cols[c][r]);
        for (const auto& [_, values] : text_cols) {
            std::string v = (*values)[r];
            for (char& ch : v)
                if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
            line += (line.empty() ? "" : ",") + v;
        }
        f << line << '\n';
    }
    if (!f) throw Error("write failed: " + path);
}

void write_wigner_csv(const std::string& path, const WignerGrid& g) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    // First row: p axis; first column: x axis; W(x_i, p_j) elsewhere.
    f << "x\\p";
    for (double p : g.p_axis) f << ',' << format_double(p);
    f << '\n';
    for (std::size_t i = 0; i < g.x_axis.size(); ++i) {
        f << format_double(g.x_axis[i]);
        for (Eigen::Index j = 0; j < g.values.cols(); ++j)
            f << ',' << format_double(g.values(static_cast<Eigen::Index>(i), j));
        f << '\n';
    }
    if (!f) throw Error("write failed: " + path);
}

namespace {

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
    if (!f) throw Error("write failed: " + path.string());
}

// Writes into a sibling staging directory and renames it into place, so a
// failure leaves nothing behind.
template <class Fill>
void atomic_dir(const fs::path& target, Fill fill) {
    fs::create_directories(target.parent_path().empty() ? fs::path(".") : target.parent_path());
    fs::path stage = target;
    stage += ".partial";
    fs::remove_all(stage);
    fs::create_directories(stage);
    try {
        fill(stage);
    } catch (...) {
        fs::remove_all(stage);
        throw;
    }
    fs::remove_all(target);
    fs::rename(stage, target);
}

std::string error_tag(const std::exception& e) {
    if (dynamic_cast<const IntegrationFailure*>(&e)) return "integration_failure";
    if (dynamic_cast<const TruncationOverflow*>(&e)) return "truncation_overflow";
    if (dynamic_cast<const ConvergenceFailure*>(&e)) return "convergence_failure";
    if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
    if (dynamic_cast<const InvalidDimension*>(&e)) return "invalid_dimension";
    return "error";
}

template <class Task>
void run_pool(std::size_t n, int jobs, Task task) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < n; i = next++) task(i);
    };
    if (workers == 1 || n <= 1) {
        loop();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
}

struct Axis {
    std::string name;
    std::vector<double> values;
};

std::vector<Axis> read_axes(const json& grid) {
    std::vector<Axis> axes;
    if (grid.is_array()) {
        for (const auto& a : grid)
            axes.push_back({a.at("name").get<std::string>(), a.at("values").get<std::vector<double>>()});
    } else if (grid.is_object()) {
        for (const auto& [k, v] : grid.items()) axes.push_back({k, v.get<std::vector<double>>()});
    } else {
        throw DomainError("sweep grid must be an object or an array of axes");
    }
    if (axes.empty()) throw DomainError("sweep grid has no axes");
    for (const auto& a : axes)
        if (a.values.empty()) throw DomainError("sweep axis " + a.name + " is empty");
    return axes;
}

// Row-major index decomposition: the first axis varies slowest.
std::vector<std::size_t> unravel(std::size_t flat, const std::vector<Axis>& axes) {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        idx[k] = flat % axes[k].values.size();
        flat /= axes[k].values.size();
    }
    return idx;
}

std::size_t grid_size(const std::vector<Axis>& axes) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

void apply_axis(Scenario& s, const std::string& name, double v) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (name == "c_k") s.params.c_k = v;
    else if (name == "c_eps_tilde") s.params.c_eps_tilde = v;
    else if (name == "c_e") s.params.c_e = v;
    else if (name == "kappa_hz_over_2pi") s.params.kappa = two_pi * v;
    else if (name == "kappa_rad_per_s") s.params.kappa = v;
    else if (name == "t_end") s.t_end = v;
    else throw DomainError("unsupported sweep axis " + name);
}

const char* kSummaryCols[] = {"max_n", "final_n", "min_mandel_q", "max_squeezing_db",
                              "photon_rate_per_second"};

SweepResult scenario_sweep(const json& cfg, int jobs, const RunOptions& opts) {
    Scenario tmpl;
    const auto& t = cfg.at("template");
    if (t.is_string()) {
        const auto b = find_builtin(t.get<std::string>());
        if (!b) throw DomainError("unknown template scenario " + t.get<std::string>());
        tmpl = *b;
    } else {
        tmpl = scenario_from_json(t);
    }
    const auto axes = read_axes(cfg.at("grid"));
    const std::size_t n = grid_size(axes);
    RunOptions ro = opts;
    ro.check_convergence = cfg.value("check_convergence", false);

    std::vector<json> summaries(n);
    std::vector<std::string> status(n), branch(n);
    run_pool(n, jobs, [&](std::size_t i) {
        const auto idx = unravel(i, axes);
        try {
            Scenario s = tmpl;
            s.name = tmpl.name + "_cell" + std::to_string(i);
            for (std::size_t k = 0; k < axes.size(); ++k) apply_axis(s, axes[k].name, axes[k].values[idx[k]]);
            s.params.validate();
            branch[i] = to_string(derived_constants(s.params).branch);
            const auto res = compute_scenario(s, ro);
            summaries[i] = res.manifest.at("summary").at("numeric");
            status[i] = "ok";
        } catch (const std::exception& e) {
            status[i] = "error:" + error_tag(e) + ": " + e.what();
        }
    });

    SweepResult r;
    r.name = cfg.value("name", std::string("sweep"));
    for (std::size_t k = 0; k < axes.size(); ++k) {
        std::vector<double> iv(n), vv(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = unravel(i, axes);
            iv[i] = static_cast<double>(idx[k]);
            vv[i] = axes[k].values[idx[k]];
        }
        r.numeric.add("index_" + axes[k].name, iv);
        r.numeric.add(axes[k].name, vv);
    }
    for (const char* c : kSummaryCols) {
        std::vector<double> v(n, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < n; ++i)
            if (status[i] == "ok" && summaries[i].contains(c) && summaries[i][c].is_number())
                v[i] = summaries[i][c].get<double>();
        r.numeric.add(c, v);
    }
    r.status = std::move(status);
    r.branch = std::move(branch);
    r.manifest = {{"schema_version", kSchemaVersion},
                  {"kind", "scenario_sweep"},
                  {"name", r.name},
                  {"template", scenario_to_json(tmpl)},
                  {"check_convergence", ro.check_convergence},
                  {"dissipator_note", kDissipatorNote}};
    return r;
}

SweepResult calibration_sweep(const json& cfg, int jobs) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const auto axes = read_axes(cfg.at("grid"));
    if (axes.size() != 2 || axes[0].name != "temperature_k" || axes[1].name != "p_in_ratio")
        throw DomainError("calibration grid needs axes temperature_k then p_in_ratio");
    const json ref = cfg.value("reference", json::object());
    const json cal = cfg.value("calibration", json::object());
    const double t_ref = ref.value("temperature_k", 0.01);
    const double g0_ref = two_pi * ref.value("g0_hz_over_2pi", 106.0);
    const double target = cfg.value("target_ratio", 1e3);

    CalibrationInput base;
    base.omega_m = two_pi * cal.value("omega_m_hz_over_2pi", 5.33e6);
    base.kappa = two_pi * cal.value("kappa_hz_over_2pi", 118e3);
    base.kappa_ex = two_pi * cal.value("kappa_ex_hz_over_2pi", 42e3);
    base.p_in = 1.0;
    base.p_cal = 1.0;
    base.p_cal_meas = 1.0;
    base.n_bar_m = thermal_occupancy(t_ref, base.omega_m);
    // Fix the measured sideband ratio so the reference point reproduces g0_ref.
    base.p_sb_meas = 1.0;
    const double unit = calibration_g0(base);
    base.p_sb_meas = std::pow(g0_ref / base.omega_m / unit, 2);
    const double n_ref = base.n_bar_m;

    const std::size_t n = grid_size(axes);
    std::vector<double> nbar(n), g0w(n), g0hz(n), ratio(n), closed(n);
    std::vector<std::string> status(n);
    run_pool(n, jobs, [&](std::size_t i) {
        const auto idx = unravel(i, axes);
        const double T = axes[0].values[idx[0]], P = axes[1].values[idx[1]];
        try {
            CalibrationInput c = base;
            c.n_bar_m = thermal_occupancy(T, base.omega_m);
            c.p_in = P;
            const double g = calibration_g0(c);
            nbar[i] = c.n_bar_m;
            g0w[i] = g;
            g0hz[i] = g * base.omega_m / two_pi;
            ratio[i] = g * base.omega_m / g0_ref;
            closed[i] = std::sqrt(n_ref / c.n_bar_m / P);
            status[i] = "ok";
        } catch (const std::exception& e) {
            nbar[i] = g0w[i] = g0hz[i] = ratio[i] = closed[i] = std::numeric_limits<double>::quiet_NaN();
            status[i] = "error:" + error_tag(e) + ": " + e.what();
        }
    });

    SweepResult r;
    r.name = cfg.value("name", std::string("calibration"));
    std::vector<double> it(n), ip(n), tv(n), pv(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = unravel(i, axes);
        it[i] = static_cast<double>(idx[0]);
        ip[i] = static_cast<double>(idx[1]);
        tv[i] = axes[0].values[idx[0]];
        pv[i] = axes[1].values[idx[1]];
    }
    r.numeric.add("index_temperature_k", it);
    r.numeric.add("temperature_k", tv);
    r.numeric.add("index_p_in_ratio", ip);
    r.numeric.add("p_in_ratio", pv);
    r.numeric.add("n_bar_m", nbar);
    r.numeric.add("g0_over_omega_m", g0w);
    r.numeric.add("g0_hz_over_2pi", g0hz);
    r.numeric.add("ratio_to_reference", ratio);
    r.numeric.add("ratio_closed_form", closed);
    r.status = std::move(status);

    // g0 scales as p_in^(-1/2): the target contour is where p_in = (g0(T, 1) / (target g0_ref))^2.
    Table contour;
    std::vector<double> ct, cp, cn;
    for (double T : axes[0].values) {
        try {
            CalibrationInput c = base;
            c.n_bar_m = thermal_occupancy(T, base.omega_m);
            c.p_in = 1.0;
            const double g = calibration_g0(c) * base.omega_m;
            ct.push_back(T);
            cn.push_back(c.n_bar_m);
            cp.push_back(std::pow(g / (target * g0_ref), 2));
        } catch (const std::exception&) {
        }
    }
    contour.add("temperature_k", ct);
    contour.add("n_bar_m", cn);
    contour.add("p_in_ratio_at_target", cp);
    r.contour = std::move(contour);

    r.manifest = {{"schema_version", kSchemaVersion},
                  {"kind", "calibration_sweep"},
                  {"name", r.name},
                  {"reference",
                   {{"temperature_k", t_ref},
                    {"n_bar_m", n_ref},
                    {"g0_hz_over_2pi", g0_ref / two_pi},
                    {"p_sb_over_p_cal_meas", base.p_sb_meas}}},
                  {"calibration",
                   {{"omega_m_hz_over_2pi", base.omega_m / two_pi},
                    {"kappa_hz_over_2pi", base.kappa / two_pi},
                    {"kappa_ex_hz_over_2pi", base.kappa_ex / two_pi}}},
                  {"target_ratio", target}};
    return r;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::pow(10.0, lo + (hi - lo) * i / (n - 1));
    return v;
}

}  // namespace

std::vector<std::string> builtin_sweep_names() { return {"fig9"}; }

std::optional<json> find_builtin_sweep(const std::string& name) {
    if (name != "fig9") return std::nullopt;
    return json{{"schema_version", kSchemaVersion},
                {"kind", "calibration_sweep"},
                {"name", "fig9"},
                {"grid",
                 json::array({{{"name", "temperature_k"}, {"values", logspace(-4.0, -1.0, 61)}},
                              {{"name", "p_in_ratio"}, {"values", logspace(-9.0, 0.0, 91)}}})},
                {"reference", {{"temperature_k", 0.01}, {"g0_hz_over_2pi", 106.0}}},
                {"calibration",
                 {{"omega_m_hz_over_2pi", 5.33e6},
                  {"kappa_hz_over_2pi", 118e3},
                  {"kappa_ex_hz_over_2pi", 42e3}}},
                {"target_ratio", 1e3}};
}

SweepResult sweep(const json& config, int jobs, const RunOptions& opts) {
    if (!config.contains("schema_version") || config.at("schema_version").get<int>() != kSchemaVersion)
        throw DomainError("sweep config needs schema_version " + std::to_string(kSchemaVersion));
    const std::string kind = config.value("kind", std::string("scenario_sweep"));
    if (kind == "calibration_sweep") return calibration_sweep(config, jobs);
    if (kind == "scenario_sweep") return scenario_sweep(config, jobs, opts);
    throw DomainError("unknown sweep kind " + kind);
}

json run_sweep(const json& config, const std::string& out_dir, int jobs, const RunOptions& opts) {
    SweepResult r = sweep(config, jobs, opts);
    json m = r.manifest;
    m["files"] = {{"table", "sweep.csv"}};
    if (r.contour) m["files"]["contour"] = "contour.csv";
    std::size_t failed = 0;
    for (const auto& s : r.status) failed += (s != "ok");
    m["rows"] = r.status.size();
    m["failed_rows"] = failed;
    atomic_dir(fs::path(out_dir) / r.name, [&](const fs::path& dir) {
        std::vector<std::pair<std::string, const std::vector<std::string>*>> text;
        if (!r.branch.empty()) text.emplace_back("branch", &r.branch);
        text.emplace_back("status", &r.status);
        write_table_csv((dir / "sweep.csv").string(), r.numeric, text);
        if (r.contour) write_table_csv((dir / "contour.csv").string(), *r.contour);
        write_json(dir / "manifest.json", m);
    });
    return m;
}

json run_scenario(const Scenario& cfg, const std::string& out_dir, const RunOptions& opts) {
    ScenarioResult res = compute_scenario(cfg, opts);
    json m = res.manifest;
    json files = json::object();
    for (const auto& [stem, _] : res.tables) files[stem] = stem + ".csv";
    json wfiles = json::array();
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        const auto& s = res.snapshots[i];
        const std::string f = "wigner_" + s.label + "_" + std::to_string(i) + ".csv";
        wfiles.push_back({{"file", f},
                          {"run", s.label},
                          {"s", s.s},
                          {"x_extent", s.grid.x_axis.back()},
                          {"p_extent", s.grid.p_axis.back()},
                          {"warnings", s.grid.warnings}});
    }
    if (!wfiles.empty()) files["wigner"] = wfiles;
    m["files"] = files;
    atomic_dir(fs::path(out_dir) / res.scenario.name, [&](const fs::path& dir) {
        for (const auto& [stem, table] : res.tables)
            write_table_csv((dir / (stem + ".csv")).string(), table);
        for (std::size_t i = 0; i < res.snapshots.size(); ++i)
            write_wigner_csv((dir / wfiles[i]["file"].get<std::string>()).string(),
                             res.snapshots[i].grid);
        write_json(dir / "manifest.json", m);
    });
    return m;
}

}  // namespace pdce
