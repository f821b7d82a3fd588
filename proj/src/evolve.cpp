#include "pdce/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

namespace pdce {

namespace {

constexpr cplx I{0.0, 1.0};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

std::string fmt_s(double s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", s);
    return buf;
}

void check_times(const std::vector<double>& times) {
    if (times.empty()) throw DomainError("time grid is empty");
    if (times.front() != 0.0) throw DomainError("time grid must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw DomainError("time grid must be strictly ascending");
}

int leak_levels(int dim, double fraction) {
    return std::max(1, static_cast<int>(std::ceil(fraction * dim - 1e-12)));
}

// Problem concept:
//   using State; void rhs(double s, const State& y, State& dy);
//   double populations_tail(const State& y) const;
//   double n_error(const State& err, const State& y) const;
//   QuantumState snapshot(double s, const State& y) const;

template <class P>
void integrate(P& prob, typename P::State y, const std::vector<double>& times,
               const IntegratorOptions& o, IntegratorStats& st, const SnapshotObserver& observe) {
    using State = typename P::State;
    check_times(times);
    const int dim = prob.dim;
    const int tail = leak_levels(dim, o.leak_fraction);

    auto guard = [&](double s, const State& state) {
        if (!o.check_leakage) return;
        const double leak = prob.tail_population(state, tail);
        st.max_leak = std::max(st.max_leak, leak);
        if (leak > o.leak_threshold)
            throw TruncationOverflow("truncation overflow at s=" + fmt_s(s) + ": top " +
                                         std::to_string(tail) + " Fock levels hold " +
                                         fmt_s(leak) + " > " + fmt_s(o.leak_threshold) +
                                         "; increase dim (currently " + std::to_string(dim) + ")",
                                     s, leak);
    };

    auto emit = [&](std::size_t idx, double s, const State& state) {
        QuantumState q = prob.snapshot(s, state);
        if (o.diagnose_snapshots) {
            if (q.is_ket()) {
                st.max_norm_error =
                    std::max(st.max_norm_error, std::abs(q.amplitudes().squaredNorm() - 1.0));
            } else {
                const auto d = diagnose_density(q.rho());
                st.max_trace_error = std::max(st.max_trace_error, d.trace_error);
                st.max_hermiticity = std::max(st.max_hermiticity, d.hermiticity);
                st.min_eigenvalue = std::min(st.min_eigenvalue, d.min_eigenvalue);
            }
        }
        observe(idx, s, q);
    };

    guard(0.0, y);
    emit(0, 0.0, y);
    if (times.size() == 1) return;

    State k1, k2, k3, k4, k5, k6, k7, tmp, ynew, err;
    double s = 0.0;
    prob.rhs(s, y, k1);
    ++st.rhs_evals;

    auto weighted_rms = [&](const State& e, const State& a, const State& b) {
        const auto sc = o.atol + o.rtol * a.array().abs().max(b.array().abs());
        return std::sqrt((e.array().abs() / sc).square().mean());
    };

    double h;
    if (o.fixed_step) {
        h = o.fixed_step_size;
    } else {
        const auto sc = o.atol + o.rtol * y.array().abs();
        const double d0 = std::sqrt((y.array().abs() / sc).square().mean());
        const double d1 = std::sqrt((k1.array().abs() / sc).square().mean());
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-4 : 0.01 * d0 / d1;
        h = std::min(h, o.max_step);
    }
    st.smallest_step = std::numeric_limits<double>::infinity();

    long steps = 0;
    for (std::size_t idx = 1; idx < times.size(); ++idx) {
        const double target = times[idx];
        while (s < target) {
            if (++steps > o.max_steps)
                throw IntegrationFailure("step budget exhausted at s=" + fmt_s(s), s);
            const double remaining = target - s;
            const bool clipped = h >= remaining * (1.0 - 1e-12);
            const double hs = clipped ? remaining : h;

            tmp = y + hs * a21 * k1;
            prob.rhs(s + c2 * hs, tmp, k2);
            tmp = y + hs * (a31 * k1 + a32 * k2);
            prob.rhs(s + c3 * hs, tmp, k3);
            tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
            prob.rhs(s + c4 * hs, tmp, k4);
            tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            prob.rhs(s + c5 * hs, tmp, k5);
            tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            prob.rhs(s + hs, tmp, k6);
            ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const double s_new = clipped ? target : s + hs;
            prob.rhs(s_new, ynew, k7);
            st.rhs_evals += 6;

            if (o.fixed_step) {
                if (!ynew.allFinite())
                    throw IntegrationFailure("non-finite state at s=" + fmt_s(s), s);
                y.swap(ynew);
                k1.swap(k7);
                s = s_new;
                ++st.accepted;
                st.smallest_step = std::min(st.smallest_step, hs);
                st.largest_step = std::max(st.largest_step, hs);
                guard(s, y);
                continue;
            }

            err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double en = weighted_rms(err, y, ynew);
            if (!std::isfinite(en)) en = std::numeric_limits<double>::infinity();

            if (en <= 1.0) {
                st.n_error_budget += prob.n_error(err, y);
                y.swap(ynew);
                k1.swap(k7);
                s = s_new;
                ++st.accepted;
                st.smallest_step = std::min(st.smallest_step, hs);
                st.largest_step = std::max(st.largest_step, hs);
                guard(s, y);
                const double fac =
                    en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
                const double proposal = std::min(hs * fac, o.max_step);
                h = clipped ? std::max(h, proposal) : proposal;
                h = std::min(h, o.max_step);
            } else {
                ++st.rejected;
                const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
                h = hs * fac;
                if (h < 1e-13 * std::max(1.0, std::abs(s)))
                    throw IntegrationFailure("step size underflow at s=" + fmt_s(s) +
                                                 " (local error could not be controlled)",
                                             s);
            }
        }
        emit(idx, s, y);
    }
    if (!std::isfinite(st.smallest_step)) st.smallest_step = 0.0;
}

// H(s) = diag(E) + sum_d band_d(s); bands are stored relative to the exact
// diagonal frame rho~ = e^{iEs} rho e^{-iEs}.
class BandedGenerator {
public:
    struct Band {
        int row0, col0, len;
        Eigen::ArrayXcd b0, b1;
        Eigen::ArrayXd dE;  // E_row - E_col
    };

    explicit BandedGenerator(const ScaledGenerator& g) : amp_(g.drive_amplitude), freq_(g.drive_frequency) {
        const Matrix& h0 = g.h0.matrix();
        const Matrix& h1 = g.h1.matrix();
        if (g.h0.dim() != g.h1.dim()) throw DimensionMismatch("generator parts differ in dimension");
        const double herm = std::max(g.h0.hermiticity_defect(), g.h1.hermiticity_defect());
        if (herm > 1e-10) throw NotHermitian("generator is not Hermitian (defect " + fmt_s(herm) + ")");
        dim = g.h0.dim();
        E = h0.diagonal().real();
        for (int d = -(dim - 1); d <= dim - 1; ++d) {
            const int row0 = std::max(0, -d), col0 = std::max(0, d), len = dim - std::abs(d);
            Band b{row0, col0, len, Eigen::ArrayXcd(len), Eigen::ArrayXcd(len), Eigen::ArrayXd(len)};
            bool any = false;
            for (int k = 0; k < len; ++k) {
                const int r = row0 + k, c = col0 + k;
                b.b0(k) = (d == 0) ? cplx(0.0) : h0(r, c);
                b.b1(k) = h1(r, c);
                b.dE(k) = E(r) - E(c);
                any = any || b.b0(k) != cplx(0.0) || b.b1(k) != cplx(0.0);
            }
            if (any) bands.push_back(std::move(b));
        }
        values_.resize(bands.size());
    }

    // Interaction-picture band values at s.
    const std::vector<Eigen::ArrayXcd>& at(double s) {
        const double c = amp_ * std::cos(freq_ * s);
        for (std::size_t i = 0; i < bands.size(); ++i) {
            const Band& b = bands[i];
            values_[i] = (I * s * b.dE).exp() * (b.b0 + c * b.b1);
        }
        return values_;
    }

    int dim = 0;
    RealVector E;
    std::vector<Band> bands;

private:
    double amp_, freq_;
    std::vector<Eigen::ArrayXcd> values_;
};

RealVector sqrt_levels(int dim, int offset) {
    RealVector w(dim);
    for (int m = 0; m < dim; ++m) w(m) = std::sqrt(static_cast<double>(m + offset));
    return w;
}

Matrix decay_mask(int dim, double k) {
    Matrix L(dim, dim);
    for (int n = 0; n < dim; ++n)
        for (int m = 0; m < dim; ++m) L(m, n) = -0.5 * k * (m + n);
    return L;
}

double density_tail(const Matrix& y, int tail) {
    return y.diagonal().real().tail(tail).sum();
}

double density_n_error(const Matrix& err, const Matrix& /*y*/) {
    double acc = 0.0;
    for (Eigen::Index m = 1; m < err.rows(); ++m) acc += m * std::abs(err(m, m));
    return acc;
}

double ket_n_error(const Vector& err, const Vector& y) {
    double acc = 0.0;
    for (Eigen::Index m = 1; m < err.size(); ++m) acc += 2.0 * m * std::abs(y(m)) * std::abs(err(m));
    return acc;
}

struct BandedDensity {
    using State = Matrix;
    BandedGenerator gen;
    double k;
    int dim;
    RealVector w;
    Matrix L;
    Matrix X;
    Eigen::ArrayXcd q;

    BandedDensity(const ScaledGenerator& g, double kappa)
        : gen(g), k(kappa), dim(gen.dim), w(sqrt_levels(gen.dim - 1, 1)),
          L(decay_mask(gen.dim, kappa)), X(gen.dim, gen.dim), q(gen.dim - 1) {}

    void rhs(double s, const Matrix& y, Matrix& dy) {
        const auto& v = gen.at(s);
        X.setZero();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& b = gen.bands[i];
            X.middleRows(b.row0, b.len).noalias() +=
                v[i].matrix().asDiagonal() * y.middleRows(b.col0, b.len);
        }
        dy.noalias() = -I * (X - X.adjoint());
        if (k > 0.0) {
            const int n1 = dim - 1;
            for (int m = 0; m < n1; ++m) q(m) = w(m) * std::exp(I * s * (gen.E(m) - gen.E(m + 1)));
            dy.topLeftCorner(n1, n1).noalias() +=
                k * (q.matrix().asDiagonal() * y.bottomRightCorner(n1, n1) *
                     q.matrix().conjugate().asDiagonal());
            dy += L.cwiseProduct(y);
        }
    }
    double tail_population(const Matrix& y, int tail) const { return density_tail(y, tail); }
    double n_error(const Matrix& e, const Matrix& y) const { return density_n_error(e, y); }
    QuantumState snapshot(double s, const Matrix& y) const {
        const Eigen::ArrayXcd ph = (-I * s * gen.E.array()).exp();
        Matrix r = ph.matrix().asDiagonal() * y * ph.matrix().conjugate().asDiagonal();
        return QuantumState::density_unchecked(std::move(r));
    }
};

struct BandedKet {
    using State = Vector;
    BandedGenerator gen;
    int dim;

    explicit BandedKet(const ScaledGenerator& g) : gen(g), dim(gen.dim) {}

    void rhs(double s, const Vector& y, Vector& dy) {
        const auto& v = gen.at(s);
        dy.setZero(dim);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& b = gen.bands[i];
            dy.segment(b.row0, b.len).array() += v[i] * y.segment(b.col0, b.len).array();
        }
        dy *= -I;
    }
    double tail_population(const Vector& y, int tail) const { return y.tail(tail).squaredNorm(); }
    double n_error(const Vector& e, const Vector& y) const { return ket_n_error(e, y); }
    QuantumState snapshot(double s, const Vector& y) const {
        Vector psi = ((-I * s * gen.E.array()).exp() * y.array()).matrix();
        return QuantumState::ket_unchecked(std::move(psi));
    }
};

struct DenseDensity {
    using State = Matrix;
    const HamiltonianProvider& h;
    double k;
    int dim;
    RealVector w;
    Matrix L;
    Matrix X;

    DenseDensity(const HamiltonianProvider& hp, double kappa, int d)
        : h(hp), k(kappa), dim(d), w(sqrt_levels(d - 1, 1)), L(decay_mask(d, kappa)), X(d, d) {}

    void rhs(double s, const Matrix& y, Matrix& dy) {
        const Operator H = h(s);
        if (H.dim() != dim) throw DimensionMismatch("Hamiltonian provider returned wrong dimension");
        X.noalias() = H.matrix() * y;
        dy.noalias() = -I * (X - X.adjoint());
        if (k > 0.0) {
            const int n1 = dim - 1;
            dy.topLeftCorner(n1, n1).noalias() +=
                k * (w.asDiagonal() * y.bottomRightCorner(n1, n1) * w.asDiagonal());
            dy += L.cwiseProduct(y);
        }
    }
    double tail_population(const Matrix& y, int tail) const { return density_tail(y, tail); }
    double n_error(const Matrix& e, const Matrix& y) const { return density_n_error(e, y); }
    QuantumState snapshot(double, const Matrix& y) const { return QuantumState::density_unchecked(y); }
};

struct DenseKet {
    using State = Vector;
    const HamiltonianProvider& h;
    int dim;

    DenseKet(const HamiltonianProvider& hp, int d) : h(hp), dim(d) {}

    void rhs(double s, const Vector& y, Vector& dy) {
        const Operator H = h(s);
        if (H.dim() != dim) throw DimensionMismatch("Hamiltonian provider returned wrong dimension");
        dy.noalias() = -I * (H.matrix() * y);
    }
    double tail_population(const Vector& y, int tail) const { return y.tail(tail).squaredNorm(); }
    double n_error(const Vector& e, const Vector& y) const { return ket_n_error(e, y); }
    QuantumState snapshot(double, const Vector& y) const { return QuantumState::ket_unchecked(y); }
};

Matrix initial_density(const QuantumState& s) {
    return s.is_ket() ? Matrix(s.amplitudes() * s.amplitudes().adjoint()) : s.rho();
}

const Vector& initial_ket(const QuantumState& s) {
    if (!s.is_ket()) throw InvalidState("Schrodinger propagation needs a ket");
    return s.amplitudes();
}

void check_kappa(double k) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("kappa must be finite and >= 0");
}

SnapshotObserver collector(Trajectory& tr) {
    return [&tr](std::size_t, double s, const QuantumState& q) {
        tr.times.push_back(s);
        tr.states.push_back(q);
    };
}

}  // namespace

Trajectory propagate_master(const HamiltonianProvider& h, double kappa_scaled,
                            const QuantumState& rho0, const std::vector<double>& times,
                            const IntegratorOptions& opts) {
    check_kappa(kappa_scaled);
    Trajectory tr;
    DenseDensity prob(h, kappa_scaled, rho0.dim());
    integrate(prob, initial_density(rho0), times, opts, tr.stats, collector(tr));
    return tr;
}

IntegratorStats propagate_master(const ScaledGenerator& g, double kappa_scaled,
                                 const QuantumState& rho0, const std::vector<double>& times,
                                 const SnapshotObserver& observer, const IntegratorOptions& opts) {
    check_kappa(kappa_scaled);
    if (g.h0.dim() != rho0.dim()) throw DimensionMismatch("state and generator dimensions differ");
    IntegratorStats st;
    BandedDensity prob(g, kappa_scaled);
    integrate(prob, initial_density(rho0), times, opts, st, observer);
    return st;
}

Trajectory propagate_master(const ScaledGenerator& g, double kappa_scaled,
                            const QuantumState& rho0, const std::vector<double>& times,
                            const IntegratorOptions& opts) {
    Trajectory tr;
    tr.stats = propagate_master(g, kappa_scaled, rho0, times, collector(tr), opts);
    return tr;
}

Trajectory propagate_schrodinger(const HamiltonianProvider& h, const QuantumState& psi0,
                                 const std::vector<double>& times, const IntegratorOptions& opts) {
    Trajectory tr;
    DenseKet prob(h, psi0.dim());
    integrate(prob, Vector(initial_ket(psi0)), times, opts, tr.stats, collector(tr));
    return tr;
}

IntegratorStats propagate_schrodinger(const ScaledGenerator& g, const QuantumState& psi0,
                                      const std::vector<double>& times,
                                      const SnapshotObserver& observer,
                                      const IntegratorOptions& opts) {
    if (g.h0.dim() != psi0.dim()) throw DimensionMismatch("state and generator dimensions differ");
    IntegratorStats st;
    BandedKet prob(g);
    integrate(prob, Vector(initial_ket(psi0)), times, opts, st, observer);
    return st;
}

Trajectory propagate_schrodinger(const ScaledGenerator& g, const QuantumState& psi0,
                                 const std::vector<double>& times, const IntegratorOptions& opts) {
    Trajectory tr;
    tr.stats = propagate_schrodinger(g, psi0, times, collector(tr), opts);
    return tr;
}

QuantumState frame_transform(const QuantumState& s, double t, const ModelParams& p,
                             FrameDirection direction) {
    const double sign = direction == FrameDirection::to_lab ? 1.0 : -1.0;
    const double lin = p.delta_bar * t;
    const double quad = p.c_k * p.delta_bar * t;
    Eigen::ArrayXcd u(s.dim());
    for (int n = 0; n < s.dim(); ++n)
        u(n) = std::exp(I * (sign * (lin * n - quad * static_cast<double>(n) * n)));
    if (s.is_ket()) return QuantumState::ket_unchecked((u * s.amplitudes().array()).matrix());
    Matrix r = u.matrix().asDiagonal() * s.rho() * u.matrix().conjugate().asDiagonal();
    return QuantumState::density_unchecked(std::move(r));
}

std::string params_hash(const ModelParams& p, HamiltonianKind k) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%d",
                  to_string(k).c_str(), p.omega_m, p.delta_bar, p.c_k, p.c_e, p.c_eps_tilde,
                  p.kappa, p.dim);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (const char* c = buf; *c; ++c) {
        h ^= static_cast<unsigned char>(*c);
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace pdce
