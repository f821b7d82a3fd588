#include "pdce/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace pdce {

namespace {

constexpr double kVacuumVariance = 0.25;

struct Moments {
    double n;
    double n2;
    cplx a;
    cplx a2;
};

Moments moments(const QuantumState& s) {
    const RealVector pop = s.populations();
    Moments m{0.0, 0.0, 0.0, 0.0};
    for (Eigen::Index k = 0; k < pop.size(); ++k) {
        m.n += k * pop(k);
        m.n2 += static_cast<double>(k) * k * pop(k);
    }
    const int dim = s.dim();
    if (s.is_ket()) {
        const Vector& psi = s.amplitudes();
        for (int k = 1; k < dim; ++k) m.a += std::conj(psi(k - 1)) * psi(k) * std::sqrt(double(k));
        for (int k = 2; k < dim; ++k)
            m.a2 += std::conj(psi(k - 2)) * psi(k) * std::sqrt(double(k) * (k - 1));
    } else {
        // <a> = Tr(a rho) = sum_k sqrt(k) rho(k, k-1)
        const Matrix& r = s.rho();
        for (int k = 1; k < dim; ++k) m.a += std::sqrt(double(k)) * r(k, k - 1);
        for (int k = 2; k < dim; ++k) m.a2 += std::sqrt(double(k) * (k - 1)) * r(k, k - 2);
    }
    return m;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

double mean_photon(const QuantumState& s) { return moments(s).n; }

std::optional<double> mandel_q(const QuantumState& s) {
    const Moments m = moments(s);
    if (m.n < 1e-10) return std::nullopt;
    return (m.n2 - m.n * m.n - m.n) / m.n;
}

std::pair<double, double> quadrature_variances(const QuantumState& s) {
    const Moments m = moments(s);
    // q^2 = (a^2 + a+^2 + 2n + 1)/4, p^2 = (-a^2 - a+^2 + 2n + 1)/4
    const double q2 = (2.0 * m.a2.real() + 2.0 * m.n + 1.0) / 4.0;
    const double p2 = (-2.0 * m.a2.real() + 2.0 * m.n + 1.0) / 4.0;
    const double q1 = m.a.real();
    const double p1 = m.a.imag();
    return {q2 - q1 * q1, p2 - p1 * p1};
}

double squeezing_db(double variance) {
    if (!(variance > 0.0)) throw DomainError("squeezing_db needs a positive variance");
    return -10.0 * std::log10(variance / kVacuumVariance);
}

double WignerGrid::integral() const { return values.sum() * cell_area; }

double WignerGrid::max_abs() const { return values.cwiseAbs().maxCoeff(); }

double WignerGrid::boundary_max_abs() const {
    const auto a = values.cwiseAbs();
    const Eigen::Index r = a.rows() - 1, c = a.cols() - 1;
    return std::max({a.row(0).maxCoeff(), a.row(r).maxCoeff(), a.col(0).maxCoeff(),
                     a.col(c).maxCoeff()});
}

WignerGrid wigner(const QuantumState& s, double x_max, double p_max, int n_points) {
    if (n_points < 3 || n_points % 2 == 0)
        throw DomainError("wigner grid needs an odd number of points >= 3");
    if (!(x_max > 0.0) || !(p_max > 0.0)) throw DomainError("wigner extents must be > 0");

    const Matrix rho_full = s.is_ket() ? Matrix(s.amplitudes() * s.amplitudes().adjoint()) : s.rho();
    // Levels with negligible population contribute below 1e-8 to W.
    const RealVector pop = rho_full.diagonal().real();
    int M = 1;
    for (int k = 0; k < pop.size(); ++k)
        if (std::abs(pop(k)) > 1e-20) M = k + 1;
    const Matrix rho = rho_full.topLeftCorner(M, M);

    WignerGrid g;
    const int G = n_points;
    g.x_axis.resize(G);
    g.p_axis.resize(G);
    for (int i = 0; i < G; ++i) {
        g.x_axis[i] = -x_max + 2.0 * x_max * i / (G - 1);
        g.p_axis[i] = -p_max + 2.0 * p_max * i / (G - 1);
    }
    const double dx = 2.0 * x_max / (G - 1), dp = 2.0 * p_max / (G - 1);
    g.cell_area = dx * dp;
    g.values.resize(G, G);

    Eigen::ArrayXd pax(G);
    for (int j = 0; j < G; ++j) pax(j) = g.p_axis[j];
    std::vector<double> sq(M);
    for (int k = 0; k < M; ++k) sq[k] = std::sqrt(static_cast<double>(k));

    Eigen::ArrayXXcd Wl(G, M);
    Eigen::ArrayXcd temp(G), temp2(G);
    for (int i = 0; i < G; ++i) {
        const double x = g.x_axis[i];
        const Eigen::ArrayXcd A = (x + cplx(0.0, 1.0) * pax) / std::numbers::sqrt2;
        const Eigen::ArrayXcd A2 = 2.0 * A;
        const Eigen::ArrayXcd A2c = A2.conjugate();
        Eigen::ArrayXd W = Eigen::ArrayXd::Zero(G);

        Wl.col(0) = (-2.0 * A.abs2()).exp().cast<cplx>() / std::numbers::pi;
        W += rho(0, 0).real() * Wl.col(0).real();
        for (int n = 1; n < M; ++n) {
            Wl.col(n) = A2 * Wl.col(n - 1) / sq[n];
            W += 2.0 * (rho(0, n) * Wl.col(n)).real();
        }
        for (int m = 1; m < M; ++m) {
            temp = Wl.col(m);
            Wl.col(m) = (A2c * temp - sq[m] * Wl.col(m - 1)) / sq[m];
            W += (rho(m, m) * Wl.col(m)).real();
            for (int n = m + 1; n < M; ++n) {
                temp2 = (A2 * Wl.col(n - 1) - sq[m] * temp) / sq[n];
                temp = Wl.col(n);
                Wl.col(n) = temp2;
                W += 2.0 * (rho(m, n) * Wl.col(n)).real();
            }
        }
        g.values.row(i) = W.matrix().transpose();
    }

    const double peak = g.max_abs();
    const double edge = g.boundary_max_abs();
    if (edge > 1e-4 * peak)
        g.warnings.push_back("grid-extent: boundary |W| = " + fmt(edge) + " exceeds 1e-4 of peak " +
                             fmt(peak));
    return g;
}

WignerGrid wigner_auto(const QuantumState& s, double extent, int n_points, int max_widen) {
    double L = extent;
    WignerGrid g = wigner(s, L, L, n_points);
    for (int k = 0; k < max_widen && !g.warnings.empty(); ++k) {
        L *= 1.5;
        g = wigner(s, L, L, n_points);
    }
    return g;
}

double wigner_negativity(const WignerGrid& g) {
    return (g.values.cwiseAbs() - g.values).sum() * g.cell_area;
}

int negative_regions(const WignerGrid& g, double threshold) {
    const Eigen::Index R = g.values.rows(), C = g.values.cols();
    const double cut = -threshold * g.max_abs();
    std::vector<int> label(R * C, 0);
    int count = 0;
    std::vector<Eigen::Index> stack;
    for (Eigen::Index i = 0; i < R; ++i) {
        for (Eigen::Index j = 0; j < C; ++j) {
            if (g.values(i, j) >= cut || label[i * C + j]) continue;
            ++count;
            stack.assign(1, i * C + j);
            label[i * C + j] = count;
            while (!stack.empty()) {
                const Eigen::Index id = stack.back();
                stack.pop_back();
                const Eigen::Index r = id / C, c = id % C;
                const Eigen::Index nr[4] = {r - 1, r + 1, r, r};
                const Eigen::Index nc[4] = {c, c, c - 1, c + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nr[k] < 0 || nr[k] >= R || nc[k] < 0 || nc[k] >= C) continue;
                    const Eigen::Index nid = nr[k] * C + nc[k];
                    if (label[nid] || g.values(nr[k], nc[k]) >= cut) continue;
                    label[nid] = count;
                    stack.push_back(nid);
                }
            }
        }
    }
    return count;
}

PhotonRate photon_rate(const std::vector<double>& times, const std::vector<double>& n,
                       double smoothing_window) {
    if (times.size() < 2 || times.size() != n.size())
        throw DomainError("photon_rate needs >= 2 matching samples");
    const double t_end = times.back();
    if (!(t_end > 0.0)) throw DomainError("photon_rate: t_end must be > 0");

    if (smoothing_window > 0.0) {
        // Centered boxcar over one drive period, only where the window fits.
        const std::size_t N = times.size();
        std::vector<double> avg(N, 0.0);
        std::vector<bool> ok(N, false);
        std::size_t lo = 0, hi = 0;
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double a = times[i] - smoothing_window / 2.0, b = times[i] + smoothing_window / 2.0;
            if (a < times.front() || b > t_end) continue;
            while (hi < N && times[hi] <= b + 1e-12 * t_end) acc += n[hi++];
            while (lo < hi && times[lo] < a - 1e-12 * t_end) acc -= n[lo++];
            avg[i] = acc / static_cast<double>(hi - lo);
            ok[i] = true;
        }
        for (std::size_t i = 1; i + 1 < N; ++i) {
            if (!ok[i - 1] || !ok[i] || !ok[i + 1]) continue;
            if (avg[i] >= avg[i - 1] && avg[i] > avg[i + 1] && times[i] > 0.0)
                return PhotonRate{avg[i] / times[i], times[i], avg[i], true};
        }
    }
    return PhotonRate{n.back() / t_end, t_end, n.back(), false};
}

PhotonRate photon_rate(const Trajectory& traj, double delta_bar, double smoothing_window) {
    std::vector<double> t, n;
    t.reserve(traj.times.size());
    n.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        t.push_back(traj.times[i] / delta_bar);
        n.push_back(mean_photon(traj.states[i]));
    }
    return photon_rate(t, n, smoothing_window);
}

}  // namespace pdce
