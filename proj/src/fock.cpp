#include "pdce/fock.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace pdce {

namespace {

void require_dim(int dim) {
    if (dim < 2) throw InvalidDimension("Fock dimension must be >= 2, got " + std::to_string(dim));
}

void require_same_dim(int a, int b) {
    if (a != b)
        throw DimensionMismatch("dimension mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
}

}  // namespace

Operator::Operator(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) throw InvalidDimension("operator matrix must be square");
    require_dim(static_cast<int>(m_.rows()));
}

Operator Operator::identity(int dim) {
    require_dim(dim);
    return Operator(Matrix::Identity(dim, dim));
}

Operator Operator::zero(int dim) {
    require_dim(dim);
    return Operator(Matrix::Zero(dim, dim));
}

Operator Operator::diagonal(const Vector& d) { return Operator(Matrix(d.asDiagonal())); }

Operator Operator::adjoint() const { return Operator(m_.adjoint()); }

double Operator::hermiticity_defect() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

double Operator::max_off_diagonal() const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m_.cols(); ++j)
        for (Eigen::Index i = 0; i < m_.rows(); ++i)
            if (i != j) worst = std::max(worst, std::abs(m_(i, j)));
    return worst;
}

bool Operator::is_finite() const { return m_.allFinite(); }

Operator& Operator::operator+=(const Operator& o) {
    require_same_dim(dim(), o.dim());
    m_ += o.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& o) {
    require_same_dim(dim(), o.dim());
    m_ -= o.m_;
    return *this;
}

Operator& Operator::operator*=(cplx z) {
    m_ *= z;
    return *this;
}

Operator operator+(Operator a, const Operator& b) { return a += b; }
Operator operator-(Operator a, const Operator& b) { return a -= b; }

Operator operator*(const Operator& a, const Operator& b) {
    require_same_dim(a.dim(), b.dim());
    return Operator(a.matrix() * b.matrix());
}

Operator operator*(cplx z, Operator a) { return a *= z; }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator destroy(int dim) {
    require_dim(dim);
    Matrix m = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(std::move(m));
}

Operator create(int dim) { return destroy(dim).adjoint(); }

Operator number(int dim) {
    require_dim(dim);
    Vector d(dim);
    for (int n = 0; n < dim; ++n) d(n) = static_cast<double>(n);
    return Operator::diagonal(d);
}

Operator sqrt_number(int dim) {
    require_dim(dim);
    Vector d(dim);
    for (int n = 0; n < dim; ++n) d(n) = std::sqrt(static_cast<double>(n));
    return Operator::diagonal(d);
}

// QuantumState

QuantumState QuantumState::ket(Vector amplitudes, double norm_tol) {
    const int dim = static_cast<int>(amplitudes.size());
    require_dim(dim);
    if (!amplitudes.allFinite()) throw NonFiniteInput("ket has non-finite amplitudes");
    const double norm2 = amplitudes.squaredNorm();
    if (std::abs(norm2 - 1.0) > norm_tol)
        throw InvalidState("ket is not normalized: sum |c_n|^2 = " + std::to_string(norm2));
    return QuantumState(Kind::ket, dim, std::move(amplitudes), Matrix());
}

QuantumState QuantumState::density(Matrix rho) {
    if (rho.rows() != rho.cols()) throw InvalidDimension("density matrix must be square");
    const int dim = static_cast<int>(rho.rows());
    require_dim(dim);
    if (!rho.allFinite()) throw NonFiniteInput("density matrix has non-finite entries");
    const auto d = diagnose_density(rho);
    if (d.trace_error > 1e-8)
        throw InvalidState("density trace deviates from 1 by " + std::to_string(d.trace_error));
    if (d.hermiticity > 1e-10)
        throw InvalidState("density is not Hermitian: defect " + std::to_string(d.hermiticity));
    if (d.min_eigenvalue < -1e-8)
        throw InvalidState("density has negative eigenvalue " + std::to_string(d.min_eigenvalue));
    return QuantumState(Kind::density, dim, Vector(), std::move(rho));
}

QuantumState QuantumState::ket_unchecked(Vector amplitudes) {
    const int dim = static_cast<int>(amplitudes.size());
    require_dim(dim);
    return QuantumState(Kind::ket, dim, std::move(amplitudes), Matrix());
}

QuantumState QuantumState::density_unchecked(Matrix rho) {
    if (rho.rows() != rho.cols()) throw InvalidDimension("density matrix must be square");
    const int dim = static_cast<int>(rho.rows());
    require_dim(dim);
    return QuantumState(Kind::density, dim, Vector(), std::move(rho));
}

QuantumState QuantumState::fock(int dim, int n) {
    require_dim(dim);
    if (n < 0 || n >= dim)
        throw InvalidDimension("Fock level " + std::to_string(n) + " outside dim " +
                               std::to_string(dim));
    Vector psi = Vector::Zero(dim);
    psi(n) = 1.0;
    return ket(std::move(psi));
}

QuantumState QuantumState::coherent(int dim, cplx beta) {
    const Operator a = destroy(dim);
    const Operator gen = beta * a.adjoint() - std::conj(beta) * a;
    Vector psi = expm(gen).matrix().col(0);
    psi.normalize();  // truncation tail is renormalized away
    return ket(std::move(psi), 1e-8);
}

const Vector& QuantumState::amplitudes() const {
    if (kind_ != Kind::ket) throw InvalidState("state is a density matrix, not a ket");
    return psi_;
}

const Matrix& QuantumState::rho() const {
    if (kind_ != Kind::density) throw InvalidState("state is a ket, not a density matrix");
    return rho_;
}

QuantumState QuantumState::to_density() const {
    if (kind_ == Kind::density) return *this;
    return QuantumState(Kind::density, dim_, Vector(), psi_ * psi_.adjoint());
}

RealVector QuantumState::populations() const {
    if (kind_ == Kind::ket) return psi_.cwiseAbs2();
    return rho_.diagonal().real();
}

DensityDiagnostics diagnose_density(const Matrix& rho) {
    DensityDiagnostics d{};
    d.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
    d.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

cplx expect(const Operator& m, const QuantumState& s) {
    require_same_dim(m.dim(), s.dim());
    if (s.is_ket()) {
        const Vector& psi = s.amplitudes();
        return psi.dot(m.matrix() * psi);  // dot conjugates the left argument
    }
    // Tr(M rho) without forming the product
    return m.matrix().transpose().cwiseProduct(s.rho()).sum();
}

Operator expm(const Operator& m) {
    if (!m.is_finite()) throw NonFiniteInput("expm: non-finite entries");
    if (m.max_off_diagonal() <= 1e-14) {
        Vector d = m.matrix().diagonal().array().exp();
        return Operator::diagonal(d);
    }
    return Operator(m.matrix().exp());
}

RealVector eig_hermitian(const Operator& m) {
    const double defect = m.hermiticity_defect();
    if (defect > 1e-8)
        throw NotHermitian("eig_hermitian: operator asymmetry " + std::to_string(defect));
    const Matrix herm = 0.5 * (m.matrix() + m.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace pdce
