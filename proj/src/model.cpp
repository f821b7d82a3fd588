#include "pdce/model.hpp"

#include <cmath>

namespace pdce {

namespace {

constexpr cplx I{0.0, 1.0};

struct Ladder {
    Operator a, ad, n, sn;
    explicit Ladder(int dim)
        : a(destroy(dim)), ad(create(dim)), n(number(dim)), sn(sqrt_number(dim)) {}
};

// Bracketed constant part: n + C_K a+^2 a^2 - i C_E (a+ - a)
Operator static_part(const Ladder& L, const ModelParams& p) {
    Operator h = L.n + p.c_k * (L.ad * L.ad * L.a * L.a);
    h -= (I * p.c_e) * (L.ad - L.a);
    return h;
}

// Bracketed coefficient of C_eps(t); the sqrt(C_K) and C_K strings only for dce.
Operator drive_part(const Ladder& L, const ModelParams& p, bool full) {
    Operator h = (-I) * (L.ad * L.ad - L.a * L.a);
    if (full) {
        const Operator quad = L.ad * L.ad * L.sn + L.ad * L.sn * L.ad + L.a * L.sn * L.a +
                              L.sn * L.a * L.a;
        h -= std::sqrt(p.c_k) * quad;
        const Operator kerr = L.ad * L.sn * L.ad * L.sn - L.sn * L.a * L.sn * L.a;
        h += (I * p.c_k) * kerr;
    }
    return h;
}

}  // namespace

std::string to_string(HamiltonianKind k) {
    switch (k) {
        case HamiltonianKind::dce: return "dce";
        case HamiltonianKind::wcr: return "wcr";
        case HamiltonianKind::rot: return "rot";
    }
    return "?";
}

HamiltonianKind parse_hamiltonian_kind(const std::string& s) {
    if (s == "dce") return HamiltonianKind::dce;
    if (s == "wcr") return HamiltonianKind::wcr;
    if (s == "rot") return HamiltonianKind::rot;
    throw DomainError("unknown hamiltonian '" + s + "' (expected dce, wcr or rot)");
}

std::string to_string(Branch b) {
    switch (b) {
        case Branch::hyperbolic: return "hyperbolic";
        case Branch::oscillatory: return "oscillatory";
        case Branch::degenerate: return "degenerate";
    }
    return "?";
}

void ModelParams::validate() const {
    if (dim < 2) throw InvalidDimension("dim must be >= 2");
    if (!(delta_bar > 0.0)) throw DomainError("delta_bar must be > 0");
    if (!(omega_m > 0.0)) throw DomainError("omega_m must be > 0");
    if (c_k < 0.0 || c_e < 0.0 || c_eps_tilde < 0.0)
        throw DomainError("C_K, C_E and C~_eps must be >= 0");
    if (kappa < 0.0) throw DomainError("kappa must be >= 0");
    if (!std::isfinite(c_k) || !std::isfinite(c_e) || !std::isfinite(c_eps_tilde) ||
        !std::isfinite(kappa) || !std::isfinite(delta_bar))
        throw NonFiniteInput("model parameters must be finite");
}

DerivedConstants derived_constants(const ModelParams& p) {
    DerivedConstants d{};
    d.g_k = p.c_k * p.delta_bar;
    d.chi_prime = p.c_eps_tilde * p.delta_bar / 2.0;
    const double disc = 4.0 * d.chi_prime * d.chi_prime - d.g_k * d.g_k;
    const double scale = std::max(4.0 * d.chi_prime * d.chi_prime, d.g_k * d.g_k);
    if (scale == 0.0 || std::abs(disc) <= 1e-12 * scale) {
        d.branch = Branch::degenerate;
        d.g_cal = 0.0;
    } else if (disc > 0.0) {
        d.branch = Branch::hyperbolic;
        d.g_cal = std::sqrt(disc);
    } else {
        d.branch = Branch::oscillatory;
        d.g_cal = cplx(0.0, std::sqrt(-disc));
    }
    if (d.g_k > 0.0) d.tau = std::numbers::pi / (2.0 * d.g_k);
    return d;
}

double c_eps(const ModelParams& p, double t) {
    return p.c_eps_tilde * std::cos(2.0 * p.delta_bar * t);
}

double ScaledGenerator::drive(double s) const {
    return drive_amplitude * std::cos(drive_frequency * s);
}

Operator ScaledGenerator::at(double s) const { return h0 + drive(s) * h1; }

ScaledGenerator scaled_generator(const ModelParams& p, HamiltonianKind k) {
    p.validate();
    const Ladder L(p.dim);
    if (k == HamiltonianKind::rot) {
        Operator h0 = (-p.c_k) * (L.ad * L.ad * L.a * L.a);
        h0 += (I * (p.c_eps_tilde / 2.0)) * (L.ad * L.ad - L.a * L.a);
        return ScaledGenerator{h0, Operator::zero(p.dim), 0.0, 2.0};
    }
    const bool full = (k == HamiltonianKind::dce);
    return ScaledGenerator{-1.0 * static_part(L, p), -1.0 * drive_part(L, p, full),
                           p.c_eps_tilde, 2.0};
}

Operator build_h_dce(const ModelParams& p, double t) {
    const auto g = scaled_generator(p, HamiltonianKind::dce);
    return p.delta_bar * g.at(p.delta_bar * t);
}

Operator build_h_wcr(const ModelParams& p, double t) {
    const auto g = scaled_generator(p, HamiltonianKind::wcr);
    return p.delta_bar * g.at(p.delta_bar * t);
}

Operator build_h_rot(const ModelParams& p) {
    return p.delta_bar * scaled_generator(p, HamiltonianKind::rot).h0;
}

Operator build_hamiltonian(HamiltonianKind k, const ModelParams& p, double t) {
    switch (k) {
        case HamiltonianKind::dce: return build_h_dce(p, t);
        case HamiltonianKind::wcr: return build_h_wcr(p, t);
        case HamiltonianKind::rot: return build_h_rot(p);
    }
    throw DomainError("unknown hamiltonian kind");
}

EffectiveMechanics effective_mechanical_params(const AuxCoolingParams& a, double omega_m,
                                               double kappa) {
    if (a.gamma_m < 0.0 || a.kappa_aux < 0.0 || a.g_prime < 0.0 || kappa < 0.0)
        throw DomainError("rates must be >= 0");
    if (!(omega_m > 0.0)) throw DomainError("omega_m must be > 0");
    EffectiveMechanics e{};
    const double g2 = a.g_prime * a.g_prime;
    e.Omega_m = omega_m * (1.0 - g2 / (2.0 * omega_m * omega_m));
    if (g2 == 0.0) {
        e.cooperativity = 0.0;
    } else {
        if (a.gamma_m == 0.0) throw DomainError("cooperativity undefined for gamma_m = 0");
        if (a.kappa_aux == 0.0) throw DomainError("cooperativity undefined for kappa_aux = 0");
        e.cooperativity = 4.0 * g2 / (a.kappa_aux * a.gamma_m);
    }
    e.Gamma_m = a.gamma_m * (1.0 + e.cooperativity);
    e.reversed_dissipation = e.Gamma_m > 10.0 * kappa;
    if (a.kappa_aux >= omega_m)
        e.warnings.push_back("kappa_aux >= omega_m: resolved-sideband formulas are not applicable");
    return e;
}

double calibration_g0(const CalibrationInput& c) {
    if (c.n_bar_m == 0.0) throw DomainError("calibration_g0: n_bar_m = 0");
    if (c.n_bar_m < 0.0) throw DomainError("calibration_g0: n_bar_m < 0");
    if (!(c.p_in > 0.0 && c.p_cal > 0.0 && c.p_sb_meas > 0.0 && c.p_cal_meas > 0.0))
        throw DomainError("calibration_g0: powers must be > 0");
    if (!(c.kappa_ex > 0.0) || c.kappa_ex > c.kappa)
        throw DomainError("calibration_g0: need 0 < kappa_ex <= kappa");
    if (!(c.omega_m > 0.0)) throw DomainError("calibration_g0: omega_m must be > 0");
    const double kr = c.kappa / c.kappa_ex;
    const double sb = c.kappa / (2.0 * c.omega_m);
    const double bracket = (1.0 / (4.0 * c.n_bar_m)) * kr * kr * (c.p_cal / c.p_in) *
                           (c.p_sb_meas / c.p_cal_meas) * (1.0 + sb * sb);
    return std::sqrt(bracket);
}

double thermal_occupancy(double temperature, double omega) {
    if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
    if (!(omega > 0.0)) throw DomainError("omega must be > 0");
    const double x = constants::hbar * omega / (constants::k_B * temperature);
    return 1.0 / std::expm1(x);
}

}  // namespace pdce
