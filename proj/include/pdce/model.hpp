#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pdce/fock.hpp"

namespace pdce {

enum class HamiltonianKind { dce, wcr, rot };

std::string to_string(HamiltonianKind k);
HamiltonianKind parse_hamiltonian_kind(const std::string& s);

/// Physical parameters. All frequencies and rates are angular (rad/s).
struct ModelParams {
    double omega_m = 2.0 * std::numbers::pi * 5.33e6;
    double delta_bar = 2.0 * std::numbers::pi * 5.33e6;
    double c_k = 0.0;
    double c_e = 1e-2;
    double c_eps_tilde = 0.0;
    double kappa = 2.0 * std::numbers::pi * 118e3;
    int dim = 64;

    /// Throws DomainError / InvalidDimension on violated invariants.
    void validate() const;
    /// kappa / delta_bar, the decay rate on the dimensionless time axis.
    double kappa_scaled() const { return kappa / delta_bar; }
    /// Modulation angular frequency, fixed to twice the shifted detuning.
    double modulation_frequency() const { return 2.0 * delta_bar; }
};

enum class Branch { hyperbolic, oscillatory, degenerate };
std::string to_string(Branch b);

struct DerivedConstants {
    double g_k;                 // C_K * delta_bar
    double chi_prime;           // C~_eps * delta_bar / 2
    cplx g_cal;                 // sqrt(4 chi'^2 - g_k^2), principal root
    Branch branch;
    std::optional<double> tau;  // pi / (2 g_k) in seconds; empty when g_k = 0
};

DerivedConstants derived_constants(const ModelParams& p);

/// C_eps(t) = C~_eps cos(2 delta_bar t), t in seconds.
double c_eps(const ModelParams& p, double t);

Operator build_h_dce(const ModelParams& p, double t);
Operator build_h_wcr(const ModelParams& p, double t);
Operator build_h_rot(const ModelParams& p);
Operator build_hamiltonian(HamiltonianKind k, const ModelParams& p, double t);

/// H(s)/delta_bar = h0 + drive(s) h1 on the dimensionless axis s = delta_bar t.
/// For dce and wcr, drive(s) = C~_eps cos(2 s); for rot, h1 = 0.
struct ScaledGenerator {
    Operator h0;
    Operator h1;
    double drive_amplitude = 0.0;
    double drive_frequency = 2.0;

    double drive(double s) const;
    Operator at(double s) const;
};

ScaledGenerator scaled_generator(const ModelParams& p, HamiltonianKind k);

struct AuxCoolingParams {
    double gamma_m = 0.0;    // rad/s
    double kappa_aux = 0.0;  // rad/s
    double g_prime = 0.0;    // rad/s
    double temperature = 0.0;
    double n_bar_m = 0.0;
};

struct EffectiveMechanics {
    double Omega_m;
    double Gamma_m;
    double cooperativity;
    bool reversed_dissipation;  // Gamma_m > 10 kappa
    std::vector<std::string> warnings;
};

EffectiveMechanics effective_mechanical_params(const AuxCoolingParams& a, double omega_m,
                                               double kappa);

struct CalibrationInput {
    double n_bar_m = 0.0;
    double kappa = 0.0;
    double kappa_ex = 0.0;
    double p_in = 1.0;
    double p_cal = 1.0;
    double p_sb_meas = 1.0;
    double p_cal_meas = 1.0;
    double omega_m = 0.0;
};

/// g0 / omega_m from the calibration-tone power ratios.
double calibration_g0(const CalibrationInput& c);

/// Bose-Einstein occupancy 1 / (exp(hbar omega / k_B T) - 1).
double thermal_occupancy(double temperature, double omega);

namespace constants {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_B = 1.380649e-23;      // J / K
}  // namespace constants

}  // namespace pdce
