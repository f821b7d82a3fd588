#pragma once

#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "pdce/fock.hpp"
#include "pdce/model.hpp"

namespace pdce {

// Every routine here works on the dimensionless axis s = delta_bar t, with
// Hamiltonians divided by delta_bar and the decay rate given as kappa/delta_bar.

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numbers::pi / 20.0;  // >= 20 steps per drive period
    bool fixed_step = false;
    double fixed_step_size = std::numbers::pi / 40.0;
    double leak_fraction = 0.1;     // top share of Fock levels watched
    double leak_threshold = 1e-4;   // population allowed there
    bool check_leakage = true;
    bool diagnose_snapshots = true;  // trace / Hermiticity / eigenvalue scan
    long max_steps = 100'000'000;
};

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
    double smallest_step = 0.0;
    double largest_step = 0.0;
    double max_leak = 0.0;          // worst top-level population seen
    double n_error_budget = 0.0;    // sum of |local error| projected on <n>
    double max_trace_error = 0.0;   // over stored snapshots
    double max_hermiticity = 0.0;
    double min_eigenvalue = 1.0;
    double max_norm_error = 0.0;    // kets
};

enum class Frame { lab, rotating };

struct Trajectory {
    std::vector<double> times;  // dimensionless s, first entry 0
    std::vector<QuantumState> states;
    Frame frame = Frame::lab;
    std::string params_hash;
    IntegratorStats stats;
};

using HamiltonianProvider = std::function<Operator(double s)>;
using SnapshotObserver = std::function<void(std::size_t index, double s, const QuantumState&)>;

/// Lindblad evolution in the trace-preserving form
///   d rho/ds = -i[H(s), rho] + k (a rho a+ - {n, rho}/2).
/// The generic provider path works densely in the lab frame.
Trajectory propagate_master(const HamiltonianProvider& h, double kappa_scaled,
                            const QuantumState& rho0, const std::vector<double>& times,
                            const IntegratorOptions& opts = {});

/// Structured path for H(s) = h0 + drive(s) h1. The constant diagonal of h0 is
/// integrated exactly (interaction picture) and the remaining banded part is
/// applied band by band; snapshots are returned in the lab frame.
Trajectory propagate_master(const ScaledGenerator& g, double kappa_scaled,
                            const QuantumState& rho0, const std::vector<double>& times,
                            const IntegratorOptions& opts = {});

/// Streaming variant: snapshots are handed to the observer instead of stored.
IntegratorStats propagate_master(const ScaledGenerator& g, double kappa_scaled,
                                 const QuantumState& rho0, const std::vector<double>& times,
                                 const SnapshotObserver& observer,
                                 const IntegratorOptions& opts = {});

Trajectory propagate_schrodinger(const HamiltonianProvider& h, const QuantumState& psi0,
                                 const std::vector<double>& times,
                                 const IntegratorOptions& opts = {});
Trajectory propagate_schrodinger(const ScaledGenerator& g, const QuantumState& psi0,
                                 const std::vector<double>& times,
                                 const IntegratorOptions& opts = {});
IntegratorStats propagate_schrodinger(const ScaledGenerator& g, const QuantumState& psi0,
                                      const std::vector<double>& times,
                                      const SnapshotObserver& observer,
                                      const IntegratorOptions& opts = {});

enum class FrameDirection { to_lab, to_rotating };

/// Applies U0 U1 (to_lab) or its inverse, with U0 = exp(+i delta_bar t n) and
/// U1 = exp(-i g_K t n^2). The sign of U0 follows H = -delta_bar n + ..., whose
/// free evolution is exp(+i delta_bar t n). t in seconds.
QuantumState frame_transform(const QuantumState& s, double t, const ModelParams& p,
                             FrameDirection direction);

/// Stable short digest of the parameters for trajectory metadata.
std::string params_hash(const ModelParams& p, HamiltonianKind k);

}  // namespace pdce
