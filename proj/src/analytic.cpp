#include "pdce/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace pdce {

namespace {

constexpr cplx I{0.0, 1.0};

// Everything below is evaluated on x = delta_bar t with g = C_K, chi = C~/2 and
// G = g_cal / delta_bar.
struct Scaled {
    double g;
    double chi;
    cplx G;
    Branch branch;
};

Scaled scaled(const ModelParams& p) {
    p.validate();
    const auto d = derived_constants(p);
    return Scaled{p.c_k, p.c_eps_tilde / 2.0, d.g_cal / p.delta_bar, d.branch};
}

// sinh(G x) / G, real on every branch; x at the degenerate point.
double shc(const Scaled& s, double x) {
    switch (s.branch) {
        case Branch::degenerate: return x;
        case Branch::hyperbolic: {
            const double G = s.G.real();
            const double z = G * x;
            return std::abs(z) < 1e-4 ? x * (1.0 + z * z / 6.0) : std::sinh(z) / G;
        }
        case Branch::oscillatory: {
            const double G = s.G.imag();
            const double z = G * x;
            return std::abs(z) < 1e-4 ? x * (1.0 - z * z / 6.0) : std::sin(z) / G;
        }
    }
    return x;
}

// cosh(G x), real on every branch.
double chc(const Scaled& s, double x) {
    switch (s.branch) {
        case Branch::degenerate: return 1.0;
        case Branch::hyperbolic: return std::cosh(s.G.real() * x);
        case Branch::oscillatory: return std::cos(s.G.imag() * x);
    }
    return 1.0;
}

// D / G = cosh(Gx) + i g sinh(Gx)/G
cplx d_hat(const Scaled& s, double x) { return cplx(chc(s, x), s.g * shc(s, x)); }

int substeps(const Scaled& s, double dx) {
    const double rate = std::abs(s.G) + s.g + 2.0 * s.chi;
    return 4 + static_cast<int>(std::ceil(8.0 * dx * rate));
}

// Continues arg D_hat from x0 (with known phase theta0) to x1.
double unwrap_phase(const Scaled& s, double x0, double theta0, double x1) {
    const int m = substeps(s, x1 - x0);
    double theta = theta0;
    cplx prev = d_hat(s, x0);
    for (int j = 1; j <= m; ++j) {
        const double x = x0 + (x1 - x0) * j / m;
        const cplx cur = d_hat(s, x);
        theta += std::arg(cur / prev);
        prev = cur;
    }
    return theta;
}

WeiNormanCoeffs coeffs_at(const Scaled& s, double x, double theta, double t) {
    const cplx D = d_hat(s, x);
    if (std::abs(D) < 1e-14)
        throw SingularCoefficients("Wei-Norman denominator vanishes at t=" + std::to_string(t));
    const double sh = shc(s, x);
    const cplx lnD(std::log(std::abs(D)), theta);
    WeiNormanCoeffs w;
    w.alpha = 2.0 * s.chi * std::exp(4.0 * I * s.g * x) * sh / D;
    w.beta = 4.0 * I * s.g * x - 2.0 * lnD;
    w.gamma = -2.0 * s.chi * sh / D;
    w.g_cal = s.G;
    w.t = t;
    return w;
}

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
}

}  // namespace

WeiNormanCoeffs wei_norman_coeffs(const ModelParams& p, double t) {
    check_time(t);
    const Scaled s = scaled(p);
    const double x = p.delta_bar * t;
    const double theta = unwrap_phase(s, 0.0, 0.0, x);
    auto w = coeffs_at(s, x, theta, t);
    w.g_cal *= p.delta_bar;
    return w;
}

std::vector<WeiNormanCoeffs> wei_norman_series(const ModelParams& p, const std::vector<double>& t) {
    const Scaled s = scaled(p);
    std::vector<WeiNormanCoeffs> out;
    out.reserve(t.size());
    double x_prev = 0.0, theta = 0.0;
    for (double ti : t) {
        check_time(ti);
        const double x = p.delta_bar * ti;
        if (x < x_prev) throw DomainError("wei_norman_series needs ascending times");
        theta = unwrap_phase(s, x_prev, theta, x);
        auto w = coeffs_at(s, x, theta, ti);
        w.g_cal *= p.delta_bar;
        out.push_back(w);
        x_prev = x;
    }
    return out;
}

PhiCoeffs phi_coeffs(const WeiNormanCoeffs& w) {
    const cplx emb = std::exp(-w.beta);
    PhiCoeffs f;
    f.phi1 = w.alpha * emb;
    f.phi2 = 1.0 - 2.0 * w.alpha * w.gamma * emb;
    f.phi3 = w.alpha * w.gamma * w.gamma * emb - w.gamma;
    f.phi4 = -w.alpha * w.gamma * emb;
    return f;
}

SqueezeMatrixCoeffs squeeze_matrix_coeffs(const WeiNormanCoeffs& w) {
    const cplx half = std::exp(-w.beta / 2.0);
    SqueezeMatrixCoeffs c;
    c.sq_kappa = half;
    c.sq_mu = -w.alpha * half;
    c.sq_lambda = w.gamma * half;
    c.sq_nu = (1.0 - w.alpha * w.gamma * std::exp(-w.beta)) * std::exp(w.beta / 2.0);
    return c;
}

double n_casimir(const ModelParams& p, double t) {
    check_time(t);
    const Scaled s = scaled(p);
    const double amp = 2.0 * s.chi * shc(s, p.delta_bar * t);
    return amp * amp;
}

std::optional<double> mandel_q_analytic(const ModelParams& p, double t) {
    check_time(t);
    if (t == 0.0) return std::nullopt;
    return 1.0 + 2.0 * n_casimir(p, t);
}

std::pair<double, double> quad_variances_analytic(const ModelParams& p, double t) {
    return quad_variances_from(wei_norman_coeffs(p, t));
}

std::pair<double, double> quad_variances_from(const WeiNormanCoeffs& w) {
    const auto f = phi_coeffs(w);
    const auto c = squeeze_matrix_coeffs(w);
    const cplx x = c.sq_mu * c.sq_nu + c.sq_lambda * c.sq_kappa;
    const cplx vq = (1.0 + 2.0 * f.phi4 - x) / 4.0;
    const cplx vp = (1.0 + 2.0 * f.phi4 + x) / 4.0;
    const double scale = std::max({1.0, std::abs(vq), std::abs(vp)});
    if (std::abs(vq.imag()) > 1e-9 * scale || std::abs(vp.imag()) > 1e-9 * scale)
        throw CoefficientInconsistency("quadrature variances acquired an imaginary part");
    return {vq.real(), vp.real()};
}

QuantumState analytic_state(const ModelParams& p, double t, int dim) {
    if (dim < 2) throw InvalidDimension("dim must be >= 2");
    const auto w = wei_norman_coeffs(p, t);
    const double x = p.delta_bar * t;
    const double g = p.c_k;
    const cplx half_alpha = w.alpha / 2.0;
    const cplx prefactor = std::exp(w.beta / 4.0 - I * g * x / 2.0);

    Vector c = Vector::Zero(dim);
    cplx r = 1.0;  // (alpha/2)^k sqrt((2k)!) / k!
    int last_even = 0;
    for (int k = 0; 2 * k < dim; ++k) {
        if (k > 0) r *= half_alpha * std::sqrt((2.0 * k) * (2.0 * k - 1.0)) / static_cast<double>(k);
        const double n = 2.0 * k;
        const cplx lab_phase = std::exp(I * (x * n - g * x * n * n));
        c(2 * k) = prefactor * lab_phase * r;
        last_even = 2 * k;
    }
    if (std::norm(c(last_even)) >= 1e-8)
        throw InvalidDimension("analytic_state: dim " + std::to_string(dim) +
                               " too small, top amplitude^2 = " + std::to_string(std::norm(c(last_even))));
    const double norm2 = c.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-6)
        throw CoefficientInconsistency("analytic_state norm deviates from 1: " + std::to_string(norm2));
    return QuantumState::ket_unchecked(std::move(c));
}

double RiccatiResiduals::max() const { return std::max({alpha, beta, gamma}); }

RiccatiResiduals riccati_residuals(const ModelParams& p, double t, double h_s) {
    check_time(t);
    const double x = p.delta_bar * t;
    const double g = p.c_k;
    const double chi = p.c_eps_tilde / 2.0;
    const bool central = x >= h_s;
    std::vector<double> grid;
    if (central)
        grid = {(x - h_s) / p.delta_bar, t, (x + h_s) / p.delta_bar};
    else
        grid = {t, (x + h_s) / p.delta_bar, (x + 2.0 * h_s) / p.delta_bar};
    const auto w = wei_norman_series(p, grid);
    auto deriv = [&](auto get) {
        if (central) return (get(w[2]) - get(w[0])) / (2.0 * h_s);
        return (-3.0 * get(w[0]) + 4.0 * get(w[1]) - get(w[2])) / (2.0 * h_s);
    };
    const auto& mid = central ? w[1] : w[0];
    const cplx f = 2.0 * I * chi * std::exp(4.0 * I * g * x);
    const cplx fc = std::conj(f);
    const cplx da = deriv([](const WeiNormanCoeffs& v) { return v.alpha; });
    const cplx db = deriv([](const WeiNormanCoeffs& v) { return v.beta; });
    const cplx dg = deriv([](const WeiNormanCoeffs& v) { return v.gamma; });
    RiccatiResiduals r;
    r.alpha = std::abs(da + I * (f - 2.0 * g * mid.alpha + fc * mid.alpha * mid.alpha));
    r.beta = std::abs(db + I * (-2.0 * g + 2.0 * fc * mid.alpha));
    r.gamma = std::abs(dg + I * fc * std::exp(mid.beta));
    return r;
}

double validity_limit(const ModelParams& p, double n) {
    const double gk = p.c_k * p.delta_bar;
    if (gk == 0.0) return std::numeric_limits<double>::infinity();
    return 0.25 / (4.0 * gk * std::max(n, 1.0));
}

}  // namespace pdce
