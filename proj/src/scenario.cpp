#include "pdce/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pdce/analytic.hpp"

namespace pdce {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kConvergenceTol = 1e-3;
constexpr double kSqueezingFloorDb = 1.0;  // threshold for "squeezing persists"

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = (n == 1) ? a : a + (b - a) * i / (n - 1);
    v.back() = b;
    return v;
}

double finite_or_nan(double v) { return std::isfinite(v) ? v : kNaN; }

double db_or_nan(double var) { return var > 0.0 ? squeezing_db(var) : kNaN; }

// One output time and everything requested there.
struct GridPoint {
    double s = 0.0;
    int sample = -1;     // index into the regular time series
    bool wigner = false; // snapshot written as a matrix file
    int neg = -1;        // index into the negativity series
};

std::vector<double> negativity_times(const Scenario& c) {
    if (c.negativity_points <= 0) return {};
    std::vector<double> t = linspace(0.0, c.t_end, c.negativity_points);
    if (const auto tau = c.tau_s(); tau && *tau <= c.t_end) t.push_back(*tau);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(),
                        [&](double a, double b) { return std::abs(a - b) <= 1e-9 * c.t_end; }),
            t.end());
    return t;
}

std::vector<GridPoint> build_grid(const Scenario& c, const std::vector<double>& neg_times,
                                  bool samples_only) {
    std::vector<GridPoint> raw;
    const auto base = linspace(0.0, c.t_end, c.n_samples);
    for (int i = 0; i < c.n_samples; ++i) raw.push_back({base[i], i, false, -1});
    if (!samples_only) {
        for (double t : c.wigner_times) raw.push_back({t, -1, true, -1});
        for (std::size_t j = 0; j < neg_times.size(); ++j)
            raw.push_back({neg_times[j], -1, false, static_cast<int>(j)});
    }
    std::stable_sort(raw.begin(), raw.end(),
                     [](const GridPoint& a, const GridPoint& b) { return a.s < b.s; });
    const double eps = 1e-9 * std::max(1.0, c.t_end);
    std::vector<GridPoint> out;
    for (const auto& g : raw) {
        if (!out.empty() && std::abs(out.back().s - g.s) <= eps) {
            auto& b = out.back();
            if (g.sample >= 0) {
                b.sample = g.sample;
                b.s = g.s;  // keep the regular grid value exactly
            }
            b.wigner = b.wigner || g.wigner;
            if (g.neg >= 0) b.neg = g.neg;
        } else {
            out.push_back(g);
        }
    }
    return out;
}

struct RunData {
    std::vector<double> n, q, vq, vp;
    std::vector<double> neg, regions;
    std::vector<WignerSnapshot> snapshots;
    std::vector<std::string> warnings;
    double wigner_norm_dev = 0.0;
    IntegratorStats stats;
    bool dissipative = false;
    int dim = 0;
};

IntegratorOptions integrator_options(const RunOptions& o) {
    IntegratorOptions io;
    io.fixed_step = o.fixed_step;
    io.diagnose_snapshots = o.diagnose_snapshots;
    return io;
}

RunData simulate(const Scenario& c, int dim, bool dissipative, const std::string& label,
                 const std::vector<GridPoint>& grid, std::size_t n_neg, const RunOptions& ro) {
    ModelParams p = c.params;
    p.dim = dim;
    const ScaledGenerator gen = scaled_generator(p, c.hamiltonian);

    RunData d;
    d.dissipative = dissipative;
    d.dim = dim;
    const auto ns = static_cast<std::size_t>(c.n_samples);
    d.n.assign(ns, kNaN);
    d.q.assign(ns, kNaN);
    d.vq.assign(ns, kNaN);
    d.vp.assign(ns, kNaN);
    d.neg.assign(n_neg, kNaN);
    d.regions.assign(n_neg, kNaN);

    std::vector<double> times;
    times.reserve(grid.size());
    for (const auto& g : grid) times.push_back(g.s);

    auto observe = [&](std::size_t idx, double s, const QuantumState& st) {
        const GridPoint& g = grid[idx];
        if (g.sample >= 0) {
            const auto k = static_cast<std::size_t>(g.sample);
            d.n[k] = mean_photon(st);
            d.q[k] = mandel_q(st).value_or(kNaN);
            const auto [vq, vp] = quadrature_variances(st);
            d.vq[k] = vq;
            d.vp[k] = vp;
        }
        if (g.wigner || g.neg >= 0) {
            WignerGrid w = wigner_auto(st, c.wigner_extent, c.wigner_points);
            d.wigner_norm_dev = std::max(d.wigner_norm_dev, std::abs(w.integral() - 1.0));
            for (const auto& msg : w.warnings)
                d.warnings.push_back(label + " s=" + format_double(s) + ": " + msg);
            if (g.neg >= 0) {
                d.neg[g.neg] = wigner_negativity(w);
                d.regions[g.neg] = negative_regions(w);
            }
            if (g.wigner) d.snapshots.push_back({label, s, std::move(w)});
        }
    };

    const IntegratorOptions io = integrator_options(ro);
    if (dissipative)
        d.stats = propagate_master(gen, p.kappa_scaled(), QuantumState::vacuum(dim).to_density(),
                                   times, observe, io);
    else
        d.stats = propagate_schrodinger(gen, QuantumState::vacuum(dim), times, observe, io);
    return d;
}

// <n> only, on the regular samples.
std::vector<double> photon_series(const Scenario& c, int dim, bool dissipative,
                                  const RunOptions& ro) {
    const auto grid = build_grid(c, {}, true);
    ModelParams p = c.params;
    p.dim = dim;
    const ScaledGenerator gen = scaled_generator(p, c.hamiltonian);
    std::vector<double> n(grid.size());
    std::vector<double> times;
    for (const auto& g : grid) times.push_back(g.s);
    auto observe = [&](std::size_t idx, double, const QuantumState& st) {
        n[idx] = mean_photon(st);
    };
    IntegratorOptions io = integrator_options(ro);
    io.diagnose_snapshots = false;
    if (dissipative)
        propagate_master(gen, p.kappa_scaled(), QuantumState::vacuum(dim).to_density(), times,
                         observe, io);
    else
        propagate_schrodinger(gen, QuantumState::vacuum(dim), times, observe, io);
    return n;
}

double relative_deviation(const std::vector<double>& a, const std::vector<double>& b) {
    double peak = 0.0;
    for (double v : b) peak = std::max(peak, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = std::abs(a[i] - b[i]);
        if (diff == 0.0) continue;
        const double scale = std::max(std::abs(b[i]), 1e-2 * peak);
        worst = std::max(worst, scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity());
    }
    return worst;
}

ConvergenceReport compare_dims(const Scenario& c, const std::string& label, bool dissipative,
                               int dim, const std::vector<double>& n_dim, const RunOptions& ro) {
    ConvergenceReport r;
    r.run = label;
    r.dim = dim;
    r.dim_doubled = 2 * dim;
    const auto n2 = photon_series(c, 2 * dim, dissipative, ro);
    r.max_rel_deviation = relative_deviation(n_dim, n2);
    r.passed = r.max_rel_deviation < kConvergenceTol;
    return r;
}

json stats_json(const IntegratorStats& s) {
    return json{{"accepted_steps", s.accepted},
                {"rejected_steps", s.rejected},
                {"rhs_evaluations", s.rhs_evals},
                {"smallest_step_s", s.smallest_step},
                {"largest_step_s", s.largest_step},
                {"max_top_level_population", s.max_leak},
                {"n_error_budget", s.n_error_budget},
                {"max_trace_error", s.max_trace_error},
                {"max_hermiticity_defect", s.max_hermiticity},
                {"min_eigenvalue", s.min_eigenvalue},
                {"max_norm_error", s.max_norm_error}};
}

json derived_json(const ModelParams& p) {
    const auto d = derived_constants(p);
    json j{{"g_k", d.g_k},
           {"chi_prime", d.chi_prime},
           {"g_cal_re", d.g_cal.real()},
           {"g_cal_im", d.g_cal.imag()},
           {"branch", to_string(d.branch)}};
    if (d.tau) {
        j["tau_seconds"] = *d.tau;
        j["tau_s"] = *d.tau * p.delta_bar;
    } else {
        j["tau_seconds"] = nullptr;
        j["tau_s"] = nullptr;
    }
    return j;
}

// Index of the sample closest to s.
std::size_t nearest(const std::vector<double>& axis, double s) {
    const auto it = std::lower_bound(axis.begin(), axis.end(), s);
    if (it == axis.begin()) return 0;
    if (it == axis.end()) return axis.size() - 1;
    const auto hi = static_cast<std::size_t>(it - axis.begin());
    return (std::abs(axis[hi] - s) < std::abs(axis[hi - 1] - s)) ? hi : hi - 1;
}

json run_summary(const Scenario& c, const RunData& d, const std::vector<double>& s_axis,
                 const std::vector<double>& neg_axis) {
    json j;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < d.n.size(); ++i)
        if (d.n[i] > d.n[imax]) imax = i;
    j["max_n"] = d.n[imax];
    j["s_at_max_n"] = s_axis[imax];
    j["final_n"] = d.n.back();

    double qmin = kNaN, s_qmin = kNaN;
    for (std::size_t i = 0; i < d.q.size(); ++i)
        if (std::isfinite(d.q[i]) && !(d.q[i] >= qmin)) {
            qmin = d.q[i];
            s_qmin = s_axis[i];
        }
    j["min_mandel_q"] = finite_or_nan(qmin);
    j["s_at_min_mandel_q"] = finite_or_nan(s_qmin);

    double sq = -std::numeric_limits<double>::infinity(), sp = sq, s_last = 0.0;
    for (std::size_t i = 0; i < d.vq.size(); ++i) {
        const double a = db_or_nan(d.vq[i]), b = db_or_nan(d.vp[i]);
        if (std::isfinite(a)) sq = std::max(sq, a);
        if (std::isfinite(b)) sp = std::max(sp, b);
        if (std::max(a, b) >= kSqueezingFloorDb) s_last = s_axis[i];
    }
    j["max_squeezing_q_db"] = sq;
    j["max_squeezing_p_db"] = sp;
    j["max_squeezing_db"] = std::max(sq, sp);
    j["squeezing_last_s_above_1db"] = s_last;

    std::vector<double> t(s_axis.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = s_axis[i] / c.params.delta_bar;
    if (c.t_end > 0.0) {
        const auto r = photon_rate(t, d.n, std::numbers::pi / c.params.delta_bar);
        j["photon_rate_per_second"] = r.rate;
        j["photon_rate_at_s"] = r.at_time * c.params.delta_bar;
        j["photon_rate_n"] = r.n_at;
        j["photon_rate_from_first_maximum"] = r.from_first_maximum;
    }

    if (!d.neg.empty()) {
        double mx = 0.0;
        for (double v : d.neg) mx = std::max(mx, v);
        j["max_negativity"] = mx;
        if (const auto tau = c.tau_s(); tau && *tau <= c.t_end) {
            const auto k = nearest(neg_axis, *tau);
            j["negativity_at_tau"] = d.neg[k];
            j["negative_regions_at_tau"] = d.regions[k];
        }
    }
    for (const auto& snap : d.snapshots) {
        json w{{"s", snap.s},
               {"negativity", wigner_negativity(snap.grid)},
               {"negative_regions", negative_regions(snap.grid)},
               {"integral", snap.grid.integral()}};
        j["wigner"].push_back(w);
    }
    return j;
}

struct AnalyticInvariants {
    double riccati = 0.0;
    double phi_identity = 0.0;
    double unimodularity = 0.0;
};

AnalyticInvariants analytic_invariants(const Scenario& c) {
    AnalyticInvariants a;
    const auto s = linspace(0.0, c.t_end, 100);
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = s[i] / c.params.delta_bar;
    const auto w = wei_norman_series(c.params, t);
    for (std::size_t i = 0; i < w.size(); ++i) {
        a.riccati = std::max(a.riccati, riccati_residuals(c.params, t[i]).max());
        const auto f = phi_coeffs(w[i]);
        const double lhs = std::norm(f.phi1);
        const cplx rhs = f.phi4 * (f.phi4 + 1.0);
        const double scale = std::max(std::abs(rhs), 1e-300);
        if (lhs != 0.0 || std::abs(rhs) != 0.0)
            a.phi_identity = std::max(a.phi_identity, std::abs(lhs - rhs) / scale);
        // kappa nu - lambda mu = 1 is a difference of terms that grow like n; the
        // defect is measured against their size so cancellation is not counted.
        const auto m = squeeze_matrix_coeffs(w[i]);
        const double size = std::max(1.0, std::abs(m.sq_kappa * m.sq_nu) + std::abs(m.sq_lambda * m.sq_mu));
        a.unimodularity = std::max(a.unimodularity, std::abs(m.determinant() - 1.0) / size);
    }
    return a;
}

}  // namespace

// ---------------------------------------------------------------- Scenario

void Scenario::validate() const {
    params.validate();
    if (name.empty()) throw DomainError("scenario needs a name");
    if (!std::isfinite(t_end) || !(t_end > 0.0)) throw DomainError("t_end must be > 0");
    if (n_samples < 2) throw DomainError("n_samples must be >= 2");
    for (double t : wigner_times)
        if (!(t >= 0.0) || t > t_end * (1.0 + 1e-12))
            throw DomainError("wigner time " + format_double(t) + " outside [0, t_end]");
    if (negativity_points < 0) throw DomainError("negativity_points must be >= 0");
    if (negativity_points == 1) throw DomainError("negativity series needs >= 2 points");
    if (wigner_points < 3 || wigner_points % 2 == 0)
        throw DomainError("wigner_points must be odd and >= 3");
    if (!(wigner_extent > 0.0)) throw DomainError("wigner_extent must be > 0");
}

std::optional<double> Scenario::tau_s() const {
    if (params.c_k == 0.0) return std::nullopt;
    return std::numbers::pi / (2.0 * params.c_k);
}

void Table::add(std::string name, std::vector<double> values) {
    if (!cols.empty() && values.size() != rows())
        throw DimensionMismatch("table column " + name + " has the wrong length");
    names.push_back(std::move(name));
    cols.push_back(std::move(values));
}

const std::vector<double>& Table::col(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return cols[i];
    throw DomainError("no column " + name);
}

bool Table::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

// ---------------------------------------------------------------- built-ins

namespace {

Scenario base(std::string name, std::string desc, HamiltonianKind h, double ck, double ce,
              bool kappa_on, double t_end, int n_samples, int dim) {
    Scenario s;
    s.name = std::move(name);
    s.description = std::move(desc);
    s.hamiltonian = h;
    s.params.c_k = ck;
    s.params.c_eps_tilde = ce;
    s.params.dim = dim;
    s.kappa_on = kappa_on;
    s.t_end = t_end;
    s.n_samples = n_samples;
    return s;
}

std::vector<Scenario> make_builtins() {
    using HK = HamiltonianKind;
    std::vector<Scenario> v;

    const double dce_ck[] = {0.05, 0.1, 0.15, 0.2};
    const char* letters = "abcdefgh";
    for (int i = 0; i < 4; ++i) {
        auto s = base(std::string("fig2") + letters[i], "mean photon number, full Hamiltonian",
                      HK::dce, dce_ck[i], 0.1, true, 200.0, 2001, 32);
        v.push_back(s);
    }

    const double wcr_ce[] = {0.02, 0.03};
    for (int i = 0; i < 2; ++i) {
        auto s = base(std::string("fig3") + letters[i],
                      "mean photon number, weak-coupling Hamiltonian with analytic curve", HK::wcr,
                      1e-3, wcr_ce[i], true, 150.0, 1501, 64);
        s.compare_analytic = true;
        s.lossless_companion = true;
        v.push_back(s);
    }

    for (int i = 0; i < 3; ++i) {
        auto s = base(std::string("fig4") + letters[i], "Mandel Q, full Hamiltonian", HK::dce,
                      dce_ck[i], 0.1, true, 200.0, 2001, 32);
        s.observables.mandel_q = true;
        v.push_back(s);
    }

    for (int i = 0; i < 2; ++i) {
        auto s = base(std::string("fig5") + letters[i],
                      "Mandel Q, weak-coupling Hamiltonian with analytic curve", HK::wcr, 1e-3,
                      wcr_ce[i], true, 150.0, 1501, 64);
        s.observables.mandel_q = true;
        s.compare_analytic = true;
        s.lossless_companion = true;
        v.push_back(s);
    }

    // Panels come in (S_q, S_p) pairs of one run.
    const double sq_ck[] = {0.05, 0.1};
    for (int i = 0; i < 4; ++i) {
        auto s = base(std::string("fig6") + letters[i],
                      std::string("quadrature squeezing S_") + (i % 2 ? "p" : "q") +
                          ", full Hamiltonian",
                      HK::dce, sq_ck[i / 2], 0.1, true, 200.0, 4001, 32);
        s.observables.variances = true;
        s.observables.squeezing_db = true;
        v.push_back(s);
    }
    for (int i = 0; i < 4; ++i) {
        auto s = base(std::string("fig6") + letters[4 + i],
                      std::string("quadrature squeezing S_") + (i % 2 ? "p" : "q") +
                          ", weak-coupling Hamiltonian with analytic curve",
                      HK::wcr, 1e-3, wcr_ce[i / 2], true, 200.0, 4001, 64);
        s.observables.variances = true;
        s.observables.squeezing_db = true;
        s.compare_analytic = true;
        s.lossless_companion = true;
        v.push_back(s);
    }

    struct Set {
        HK h;
        double ck, ce;
        int dim;
    };
    const Set sets[] = {{HK::dce, 0.05, 0.1, 32},
                        {HK::dce, 0.1, 0.1, 32},
                        {HK::wcr, 1e-3, 0.02, 64},
                        {HK::wcr, 1e-3, 0.03, 64}};
    for (int i = 0; i < 4; ++i) {
        const double tau = std::numbers::pi / (2.0 * sets[i].ck);
        auto s = base(std::string("fig7") + letters[i], "Wigner function at tau, lossless",
                      sets[i].h, sets[i].ck, sets[i].ce, false, tau, 1001, sets[i].dim);
        s.wigner_times = {tau};
        v.push_back(s);
    }
    for (int i = 0; i < 4; ++i) {
        const double tau = std::numbers::pi / (2.0 * sets[i].ck);
        auto s = base(std::string("fig8") + letters[i],
                      "Wigner negativity versus time, with and without loss", sets[i].h,
                      sets[i].ck, sets[i].ce, true, 1.5 * tau, 1001, sets[i].dim);
        s.negativity_points = 41;
        s.lossless_companion = true;
        v.push_back(s);
    }
    return v;
}

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
    static const std::vector<Scenario> v = make_builtins();
    return v;
}

std::optional<Scenario> find_builtin(const std::string& name) {
    for (const auto& s : builtin_scenarios())
        if (s.name == name) return s;
    return std::nullopt;
}

// ---------------------------------------------------------------- running

std::vector<ConvergenceReport> convergence_check(const Scenario& cfg, const RunOptions& opts) {
    cfg.validate();
    const int dim = opts.dim.value_or(cfg.params.dim);
    std::vector<ConvergenceReport> out;
    auto check = [&](const std::string& label, bool dissipative) {
        out.push_back(compare_dims(cfg, label, dissipative, dim,
                                   photon_series(cfg, dim, dissipative, opts), opts));
    };
    check("numeric", cfg.kappa_on);
    if (cfg.kappa_on && cfg.lossless_companion) check("numeric_lossless", false);
    return out;
}

ScenarioResult compute_scenario(const Scenario& cfg_in, const RunOptions& opts) {
    Scenario cfg = cfg_in;
    if (opts.dim) cfg.params.dim = *opts.dim;
    cfg.validate();

    const auto neg_t = negativity_times(cfg);
    const auto grid = build_grid(cfg, neg_t, false);
    const auto s_axis = linspace(0.0, cfg.t_end, cfg.n_samples);
    const int dim = cfg.params.dim;

    struct Labeled {
        std::string label;
        RunData data;
    };
    std::vector<Labeled> runs;
    runs.push_back({"numeric", simulate(cfg, dim, cfg.kappa_on, "numeric", grid, neg_t.size(), opts)});
    if (cfg.kappa_on && cfg.lossless_companion)
        runs.push_back({"numeric_lossless",
                        simulate(cfg, dim, false, "numeric_lossless", grid, neg_t.size(), opts)});

    ScenarioResult res;
    res.scenario = cfg;

    if (opts.check_convergence) {
        for (const auto& r : runs)
            res.convergence.push_back(
                compare_dims(cfg, r.label, r.data.dissipative, dim, r.data.n, opts));
        bool ok = true;
        std::string msg = "truncation not converged:";
        for (const auto& r : res.convergence)
            if (!r.passed) {
                ok = false;
                msg += " " + r.run + " deviation " + format_double(r.max_rel_deviation) +
                       " at dim " + std::to_string(r.dim) + " vs " + std::to_string(r.dim_doubled);
            }
        if (!ok) throw ConvergenceFailure(msg, res.convergence);
    }

    // Analytic companion, shared unwrap over the regular samples.
    std::vector<double> n_an, q_an, vq_an, vp_an;
    if (cfg.compare_analytic) {
        std::vector<double> t(s_axis.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = s_axis[i] / cfg.params.delta_bar;
        const auto w = wei_norman_series(cfg.params, t);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double n = n_casimir(cfg.params, t[i]);
            n_an.push_back(n);
            q_an.push_back(mandel_q_analytic(cfg.params, t[i]).value_or(kNaN));
            const auto [vq, vp] = quad_variances_from(w[i]);
            vq_an.push_back(vq);
            vp_an.push_back(vp);
        }
    }

    auto suffix = [](const std::string& label) {
        return label == "numeric" ? std::string("numeric") : std::string("numeric_lossless");
    };

    {
        Table t;
        t.add("s", s_axis);
        for (const auto& r : runs) t.add("n_" + suffix(r.label), r.data.n);
        if (cfg.compare_analytic) t.add("n_analytic", n_an);
        res.tables["n"] = std::move(t);
    }
    if (cfg.observables.mandel_q) {
        Table t;
        t.add("s", s_axis);
        for (const auto& r : runs) t.add("q_" + suffix(r.label), r.data.q);
        if (cfg.compare_analytic) t.add("q_analytic", q_an);
        res.tables["mandel_q"] = std::move(t);
    }
    if (cfg.observables.variances) {
        Table t;
        t.add("s", s_axis);
        for (const auto& r : runs) {
            t.add("var_q_" + suffix(r.label), r.data.vq);
            t.add("var_p_" + suffix(r.label), r.data.vp);
        }
        if (cfg.compare_analytic) {
            t.add("var_q_analytic", vq_an);
            t.add("var_p_analytic", vp_an);
        }
        res.tables["variances"] = std::move(t);
    }
    if (cfg.observables.squeezing_db) {
        auto to_db = [](const std::vector<double>& v) {
            std::vector<double> out(v.size());
            std::transform(v.begin(), v.end(), out.begin(), db_or_nan);
            return out;
        };
        Table t;
        t.add("s", s_axis);
        for (const auto& r : runs) {
            t.add("s_q_" + suffix(r.label), to_db(r.data.vq));
            t.add("s_p_" + suffix(r.label), to_db(r.data.vp));
        }
        if (cfg.compare_analytic) {
            t.add("s_q_analytic", to_db(vq_an));
            t.add("s_p_analytic", to_db(vp_an));
        }
        res.tables["squeezing_db"] = std::move(t);
    }
    if (!neg_t.empty()) {
        Table t;
        t.add("s", neg_t);
        for (const auto& r : runs) {
            t.add("negativity_" + suffix(r.label), r.data.neg);
            t.add("regions_" + suffix(r.label), r.data.regions);
        }
        res.tables["negativity"] = std::move(t);
    }

    // Manifest.
    json m;
    m["schema_version"] = kSchemaVersion;
    m["name"] = cfg.name;
    m["description"] = cfg.description;
    m["scenario"] = scenario_to_json(cfg);
    m["params"] = params_to_json(cfg.params);
    m["derived"] = derived_json(cfg.params);
    m["time_axis"] = "s = delta_bar * t (dimensionless); t in seconds = s / delta_bar";
    m["dissipator_note"] = kDissipatorNote;
    m["fixed_step"] = opts.fixed_step;

    json warnings = json::array();
    double max_trace = 0.0, max_herm = 0.0, min_eig = 1.0, max_norm = 0.0, wig_dev = 0.0;
    for (auto& r : runs) {
        json rj{{"integrator", r.data.dissipative ? "master" : "schrodinger"},
                {"dim", r.data.dim},
                {"kappa_scaled", r.data.dissipative ? cfg.params.kappa_scaled() : 0.0},
                {"stats", stats_json(r.data.stats)}};
        m["runs"][r.label] = rj;
        m["summary"][r.label] = run_summary(cfg, r.data, s_axis, neg_t);
        max_trace = std::max(max_trace, r.data.stats.max_trace_error);
        max_herm = std::max(max_herm, r.data.stats.max_hermiticity);
        min_eig = std::min(min_eig, r.data.stats.min_eigenvalue);
        max_norm = std::max(max_norm, r.data.stats.max_norm_error);
        wig_dev = std::max(wig_dev, r.data.wigner_norm_dev);
        for (const auto& w : r.data.warnings) warnings.push_back(w);
        for (auto& snap : r.data.snapshots) res.snapshots.push_back(std::move(snap));
    }
    if (cfg.compare_analytic) {
        json a;
        a["max_n"] = *std::max_element(n_an.begin(), n_an.end());
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vq_an.size(); ++i)
            best = std::max({best, db_or_nan(vq_an[i]), db_or_nan(vp_an[i])});
        a["max_squeezing_db"] = best;
        const double limit_s = validity_limit(cfg.params, 1.0) * cfg.params.delta_bar;
        a["validity_limit_s_at_n1"] = limit_s;
        m["summary"]["analytic"] = a;
        if (cfg.t_end > limit_s)
            warnings.push_back("analytic curve extends past the validity window (s > " +
                               format_double(limit_s) + " for <n> <= 1)");
    }

    const auto inv = analytic_invariants(cfg);
    double conv = 0.0;
    json cj = json::array();
    for (const auto& r : res.convergence) {
        conv = std::max(conv, r.max_rel_deviation);
        cj.push_back({{"run", r.run},
                      {"dim", r.dim},
                      {"dim_doubled", r.dim_doubled},
                      {"max_rel_deviation", r.max_rel_deviation},
                      {"passed", r.passed}});
    }
    m["convergence"] = cj;
    m["invariants"] = {{"max_trace_error", max_trace},
                       {"max_hermiticity_defect", max_herm},
                       {"min_eigenvalue", min_eig},
                       {"max_norm_error", max_norm},
                       {"wigner_normalization_max_deviation", wig_dev},
                       {"convergence_max_rel_deviation", conv},
                       {"riccati_residual_max", inv.riccati},
                       {"phi_identity_max_rel", inv.phi_identity},
                       {"unimodularity_max", inv.unimodularity}};
    m["warnings"] = warnings;
    res.manifest = std::move(m);
    return res;
}

// ---------------------------------------------------------------- config I/O

namespace {

double hz(double rad) { return rad / kTwoPi; }

void read_freq(const json& j, const std::string& key, double& target) {
    const std::string k_hz = key + "_hz_over_2pi";
    const bool has_hz = j.contains(k_hz), has_rad = j.contains(key + "_rad_per_s");
    if (has_hz && has_rad) throw DomainError("give either " + k_hz + " or " + key + "_rad_per_s");
    if (has_hz) target = kTwoPi * j.at(k_hz).get<double>();
    if (has_rad) target = j.at(key + "_rad_per_s").get<double>();
}

void check_schema(const json& j) {
    if (!j.contains("schema_version")) throw DomainError("config is missing schema_version");
    const int v = j.at("schema_version").get<int>();
    if (v != kSchemaVersion)
        throw DomainError("unsupported schema_version " + std::to_string(v) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
}

}  // namespace

json params_to_json(const ModelParams& p) {
    return json{{"omega_m_rad_per_s", p.omega_m},
                {"omega_m_hz_over_2pi", hz(p.omega_m)},
                {"delta_bar_rad_per_s", p.delta_bar},
                {"delta_bar_hz_over_2pi", hz(p.delta_bar)},
                {"kappa_rad_per_s", p.kappa},
                {"kappa_hz_over_2pi", hz(p.kappa)},
                {"c_k", p.c_k},
                {"c_e", p.c_e},
                {"c_eps_tilde", p.c_eps_tilde},
                {"dim", p.dim}};
}

json scenario_to_json(const Scenario& s) {
    json obs = json::array();
    if (s.observables.n) obs.push_back("n");
    if (s.observables.mandel_q) obs.push_back("q_mandel");
    if (s.observables.variances) obs.push_back("variances");
    if (s.observables.squeezing_db) obs.push_back("squeezing_db");
    json p{{"omega_m_hz_over_2pi", hz(s.params.omega_m)},
           {"delta_bar_hz_over_2pi", hz(s.params.delta_bar)},
           {"kappa_hz_over_2pi", hz(s.params.kappa)},
           {"c_k", s.params.c_k},
           {"c_e", s.params.c_e},
           {"c_eps_tilde", s.params.c_eps_tilde},
           {"dim", s.params.dim}};
    return json{{"schema_version", kSchemaVersion},
                {"name", s.name},
                {"description", s.description},
                {"hamiltonian", to_string(s.hamiltonian)},
                {"params", p},
                {"kappa_on", s.kappa_on},
                {"time_grid", {{"t_end", s.t_end}, {"units", "delta_bar_inverse"}, {"n_samples", s.n_samples}}},
                {"observables", obs},
                {"wigner_times", s.wigner_times},
                {"negativity_points", s.negativity_points},
                {"compare_analytic", s.compare_analytic},
                {"lossless_companion", s.lossless_companion},
                {"wigner_extent", s.wigner_extent},
                {"wigner_points", s.wigner_points}};
}

Scenario scenario_from_json(const json& j) {
    check_schema(j);
    Scenario s;
    if (j.contains("template")) {
        const auto name = j.at("template").get<std::string>();
        const auto b = find_builtin(name);
        if (!b) throw DomainError("unknown template scenario " + name);
        s = *b;
    }
    s.name = j.value("name", s.name);
    s.description = j.value("description", s.description);
    if (j.contains("hamiltonian"))
        s.hamiltonian = parse_hamiltonian_kind(j.at("hamiltonian").get<std::string>());
    if (j.contains("params")) {
        const auto& p = j.at("params");
        read_freq(p, "omega_m", s.params.omega_m);
        read_freq(p, "delta_bar", s.params.delta_bar);
        read_freq(p, "kappa", s.params.kappa);
        s.params.c_k = p.value("c_k", s.params.c_k);
        s.params.c_e = p.value("c_e", s.params.c_e);
        s.params.c_eps_tilde = p.value("c_eps_tilde", s.params.c_eps_tilde);
        s.params.dim = p.value("dim", s.params.dim);
    }
    s.kappa_on = j.value("kappa_on", s.kappa_on);
    double to_s = 1.0;
    if (j.contains("time_grid")) {
        const auto& g = j.at("time_grid");
        const std::string units = g.value("units", "delta_bar_inverse");
        if (units == "seconds")
            to_s = s.params.delta_bar;
        else if (units != "delta_bar_inverse")
            throw DomainError("time_grid.units must be delta_bar_inverse or seconds");
        if (g.contains("t_end")) s.t_end = g.at("t_end").get<double>() * to_s;
        s.n_samples = g.value("n_samples", s.n_samples);
    }
    if (j.contains("observables")) {
        s.observables = ObservableSet{false, false, false, false};
        for (const auto& o : j.at("observables")) {
            const auto name = o.get<std::string>();
            if (name == "n") s.observables.n = true;
            else if (name == "q_mandel") s.observables.mandel_q = true;
            else if (name == "variances") s.observables.variances = true;
            else if (name == "squeezing_db") s.observables.squeezing_db = true;
            else throw DomainError("unknown observable " + name);
        }
        s.observables.n = true;  // <n> is always recorded
    }
    if (j.contains("wigner_times")) {
        s.wigner_times.clear();
        for (const auto& t : j.at("wigner_times")) {
            if (t.is_string() && t.get<std::string>() == "tau") {
                const auto tau = s.tau_s();
                if (!tau) throw DomainError("wigner time tau needs C_K > 0");
                s.wigner_times.push_back(*tau);
            } else {
                s.wigner_times.push_back(t.get<double>() * to_s);
            }
        }
    }
    s.negativity_points = j.value("negativity_points", s.negativity_points);
    s.compare_analytic = j.value("compare_analytic", s.compare_analytic);
    s.lossless_companion = j.value("lossless_companion", s.lossless_companion);
    s.wigner_extent = j.value("wigner_extent", s.wigner_extent);
    s.wigner_points = j.value("wigner_points", s.wigner_points);
    s.validate();
    return s;
}

}  // namespace pdce
