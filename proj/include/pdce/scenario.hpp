#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pdce/evolve.hpp"
#include "pdce/model.hpp"
#include "pdce/observables.hpp"

namespace pdce {

inline constexpr int kSchemaVersion = 1;

inline constexpr const char* kDissipatorNote =
    "The master equation is integrated in the trace-preserving GKSL form "
    "d rho/dt = -i[H, rho] + kappa (a rho a^dagger - (a^dagger a rho + rho a^dagger a)/2). "
    "A form with an overall kappa/2 that gives the jump term half the weight of the "
    "anticommutator does not preserve the trace and is not used.";

/// Which time series a scenario records.
struct ObservableSet {
    bool n = true;
    bool mandel_q = false;
    bool variances = false;
    bool squeezing_db = false;
};

/// All times are on the dimensionless axis s = delta_bar t.
struct Scenario {
    std::string name;
    std::string description;
    HamiltonianKind hamiltonian = HamiltonianKind::dce;
    ModelParams params;
    bool kappa_on = true;
    double t_end = 0.0;
    int n_samples = 2;
    ObservableSet observables;
    std::vector<double> wigner_times;  // snapshots written as matrix files
    int negativity_points = 0;         // > 0: negativity series on that many points
    bool compare_analytic = false;
    bool lossless_companion = false;   // extra kappa = 0 run next to a dissipative one
    double wigner_extent = 6.0;
    int wigner_points = 201;

    void validate() const;
    std::optional<double> tau_s() const;  // pi / (2 C_K) on the s axis
};

struct RunOptions {
    std::optional<int> dim;      // overrides params.dim
    bool fixed_step = false;
    bool check_convergence = true;
    bool diagnose_snapshots = true;
};

/// Column-major table; every column has the same length.
struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;

    void add(std::string name, std::vector<double> values);
    std::size_t rows() const { return cols.empty() ? 0 : cols.front().size(); }
    const std::vector<double>& col(const std::string& name) const;
    bool has(const std::string& name) const;
};

struct WignerSnapshot {
    std::string label;  // "numeric" or "numeric_lossless"
    double s;
    WignerGrid grid;
};

struct ConvergenceReport {
    int dim = 0;
    int dim_doubled = 0;
    double max_rel_deviation = 0.0;
    bool passed = true;
    std::string run;  // which trajectory was checked
};

struct ScenarioResult {
    Scenario scenario;
    std::map<std::string, Table> tables;  // file stem -> table
    std::vector<WignerSnapshot> snapshots;
    std::vector<ConvergenceReport> convergence;
    nlohmann::json manifest;
};

struct ConvergenceFailure : Error {
    ConvergenceFailure(const std::string& what, std::vector<ConvergenceReport> r)
        : Error(what), reports(std::move(r)) {}
    std::vector<ConvergenceReport> reports;
};

/// Built-in scenarios named after the figures they reproduce.
const std::vector<Scenario>& builtin_scenarios();
std::optional<Scenario> find_builtin(const std::string& name);

/// Computes everything in memory; throws IntegrationFailure, TruncationOverflow,
/// ConvergenceFailure (only when opts.check_convergence) or DomainError.
ScenarioResult compute_scenario(const Scenario& cfg, const RunOptions& opts = {});

/// compute_scenario followed by an all-or-nothing write to out_dir/<name>/.
nlohmann::json run_scenario(const Scenario& cfg, const std::string& out_dir,
                            const RunOptions& opts = {});

/// Reruns the numeric trajectories at dim and 2 dim; relative deviation of <n>
/// is |n_dim - n_2dim| / max(|n_2dim|, 1e-2 max|n_2dim|), maximised over samples.
std::vector<ConvergenceReport> convergence_check(const Scenario& cfg, const RunOptions& opts = {});

// Config files (JSON, versioned).
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
nlohmann::json params_to_json(const ModelParams& p);

/// Long-format sweep table; errors are recorded per row.
struct SweepResult {
    std::string name;
    Table numeric;                       // numeric columns
    std::vector<std::string> status;     // "ok" or "error:<tag>: message"
    std::vector<std::string> branch;     // per row, scenario sweeps only
    std::optional<Table> contour;        // calibration sweeps: target contour
    nlohmann::json manifest;
};

/// Built-in sweep configs (fig9: calibration contour over temperature and pump power).
std::vector<std::string> builtin_sweep_names();
std::optional<nlohmann::json> find_builtin_sweep(const std::string& name);

SweepResult sweep(const nlohmann::json& config, int jobs, const RunOptions& opts = {});
nlohmann::json run_sweep(const nlohmann::json& config, const std::string& out_dir, int jobs,
                         const RunOptions& opts = {});

// Output helpers (CSV: comma separated, LF, header row, %.17g).
std::string format_double(double v);
void write_table_csv(const std::string& path, const Table& t,
                     const std::vector<std::pair<std::string, const std::vector<std::string>*>>&
                         text_cols = {});
void write_wigner_csv(const std::string& path, const WignerGrid& g);

}  // namespace pdce
