#pragma once

#include <complex>

#include <Eigen/Dense>

#include "pdce/errors.hpp"

namespace pdce {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Complex square matrix on the truncated Fock space {|0>, ..., |dim-1>}.
class Operator {
public:
    explicit Operator(Matrix entries);

    static Operator identity(int dim);
    static Operator zero(int dim);
    static Operator diagonal(const Vector& d);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    cplx operator()(int row, int col) const { return m_(row, col); }

    Operator adjoint() const;
    /// max |M - M^dagger| over all entries
    double hermiticity_defect() const;
    /// max |M_ij| over i != j
    double max_off_diagonal() const;
    bool is_finite() const;

    Operator& operator+=(const Operator& o);
    Operator& operator-=(const Operator& o);
    Operator& operator*=(cplx z);

private:
    Matrix m_;
};

Operator operator+(Operator a, const Operator& b);
Operator operator-(Operator a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(cplx z, Operator a);
Operator commutator(const Operator& a, const Operator& b);

Operator destroy(int dim);
Operator create(int dim);
Operator number(int dim);
Operator sqrt_number(int dim);

/// Ket or density matrix. The checked factories enforce the physical
/// invariants; the unchecked ones are for integrator snapshots, which are
/// validated separately and reported in the integrator statistics.
class QuantumState {
public:
    enum class Kind { ket, density };

    static QuantumState ket(Vector amplitudes, double norm_tol = 1e-10);
    static QuantumState density(Matrix rho);
    static QuantumState ket_unchecked(Vector amplitudes);
    static QuantumState density_unchecked(Matrix rho);

    static QuantumState fock(int dim, int n);
    static QuantumState vacuum(int dim) { return fock(dim, 0); }
    /// D(beta)|0> built with expm on the truncated space.
    static QuantumState coherent(int dim, cplx beta);

    Kind kind() const { return kind_; }
    bool is_ket() const { return kind_ == Kind::ket; }
    int dim() const { return dim_; }
    const Vector& amplitudes() const;
    const Matrix& rho() const;

    QuantumState to_density() const;
    RealVector populations() const;

private:
    QuantumState(Kind k, int dim, Vector psi, Matrix rho)
        : kind_(k), dim_(dim), psi_(std::move(psi)), rho_(std::move(rho)) {}

    Kind kind_;
    int dim_;
    Vector psi_;
    Matrix rho_;
};

struct DensityDiagnostics {
    double trace_error;     // |Tr rho - 1|
    double hermiticity;     // max |rho - rho^dagger|
    double min_eigenvalue;  // smallest eigenvalue of the Hermitian part
};

DensityDiagnostics diagnose_density(const Matrix& rho);

/// <psi|M|psi> or Tr(M rho).
cplx expect(const Operator& m, const QuantumState& s);

/// Matrix exponential. Diagonal input (off-diagonal max <= 1e-14) takes the
/// elementwise path, anything else uses Pade scaling and squaring.
Operator expm(const Operator& m);

/// Ascending eigenvalues of a Hermitian operator.
RealVector eig_hermitian(const Operator& m);

}  // namespace pdce
