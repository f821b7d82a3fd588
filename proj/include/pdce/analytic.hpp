#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pdce/fock.hpp"
#include "pdce/model.hpp"

namespace pdce {

// Closed-form Wei-Norman solution of the lossless weak-coupling dynamics.
// Times are in seconds, frequencies come from ModelParams (rad/s).

struct WeiNormanCoeffs {
    cplx alpha;
    cplx beta;  // log branch continued from beta(0) = 0
    cplx gamma;
    cplx g_cal;
    double t = 0.0;
};

struct PhiCoeffs {
    cplx phi1, phi2, phi3, phi4;
};

/// Squeeze-matrix entries kappa, mu, lambda, nu, prefixed to keep clear of the decay rate.
struct SqueezeMatrixCoeffs {
    cplx sq_kappa, sq_mu, sq_lambda, sq_nu;
    cplx determinant() const { return sq_kappa * sq_nu - sq_lambda * sq_mu; }
};

WeiNormanCoeffs wei_norman_coeffs(const ModelParams& p, double t);

/// Same values on an ascending grid, sharing one continuous unwrap of ln D.
std::vector<WeiNormanCoeffs> wei_norman_series(const ModelParams& p, const std::vector<double>& t);

PhiCoeffs phi_coeffs(const WeiNormanCoeffs& w);
SqueezeMatrixCoeffs squeeze_matrix_coeffs(const WeiNormanCoeffs& w);

double n_casimir(const ModelParams& p, double t);

/// 1 + 2 n_casimir(t); empty at t = 0, where Q is undefined for the vacuum.
std::optional<double> mandel_q_analytic(const ModelParams& p, double t);

/// (var_q, var_p) for q = (a + a+)/2, p = (a - a+)/2i in the Wei-Norman frame.
std::pair<double, double> quad_variances_analytic(const ModelParams& p, double t);
std::pair<double, double> quad_variances_from(const WeiNormanCoeffs& w);

/// e^{alpha a+^2/2} ... |0> mapped to the lab frame with U0 U1 (see frame_transform).
QuantumState analytic_state(const ModelParams& p, double t, int dim);

struct RiccatiResiduals {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double max() const;
};

/// Centered-difference residuals of the three Wei-Norman ODEs, measured on the
/// dimensionless axis (derivatives divided by delta_bar). h_s is the step in s.
RiccatiResiduals riccati_residuals(const ModelParams& p, double t, double h_s = 1e-4);

/// Upper end of the comparison window t <= 0.25 / (4 g_K max(n, 1)); infinite for g_K = 0.
double validity_limit(const ModelParams& p, double n);

}  // namespace pdce
