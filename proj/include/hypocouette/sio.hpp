#pragma once

#include "hypocouette/poisson.hpp"

#include <Eigen/Dense>

#include <functional>

namespace hypocouette {

using Matrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;

/// Principal-value quadrature used to assemble the singular integral operators.
///
/// Symmetric: the bilinear form of the antisymmetric kernel K(y,y')/(y-y')
///   is written as a regular double integral of K(y,y')[g(y)f(y') -
///   g(y')f(y)]/(2(y-y')) and integrated by the interior trapezoid rule.
///   The diagonal of that bounded integrand contributes an antisymmetric
///   derivative correction, so the nodal matrix is exactly i times a real
///   antisymmetric matrix (self-adjoint in the weighted inner product).
/// DiagonalSubtraction: row-wise K(y,y')f(y') - K(y,y)f(y) on the trapezoid
///   rule, with the exact log integral of the subtracted term and the
///   averaged one-sided limit on the diagonal. Second-order accurate but
///   not exactly self-adjoint.
enum class PvScheme { Symmetric, DiagonalSubtraction };

inline const char* to_string(PvScheme s)
{
    return s == PvScheme::Symmetric ? "symmetric-trapezoid+derivative-correction"
                                    : "diagonal-subtraction+exact-log";
}

/// Dense realisation of J_k on the n_y interior nodes.
struct SioOperator {
    int k = 1;
    Matrix matrix;
    std::string quadrature_tag;
    real damping_delta = 0.0;

    int ny() const { return static_cast<int>(matrix.rows()); }
};

/// Dense realisation of the commutator kernel operator H_k.
struct CommutatorOperator {
    int k = 1;
    Matrix matrix;
};

namespace detail {

/// Second-order finite-difference d/dy on m interior nodes (one-sided at the ends).
inline RMatrix fd_derivative(int m, real h)
{
    RMatrix d = RMatrix::Zero(m, m);
    for (int i = 1; i + 1 < m; ++i) {
        d(i, i - 1) = -0.5 / h;
        d(i, i + 1) = 0.5 / h;
    }
    d(0, 0) = -1.5 / h;
    d(0, 1) = 2.0 / h;
    d(0, 2) = -0.5 / h;
    d(m - 1, m - 1) = 1.5 / h;
    d(m - 1, m - 2) = -2.0 / h;
    d(m - 1, m - 3) = 0.5 / h;
    return d;
}

/// Real matrix R with (PV int kernel(y,y') f(y') / (y - y') dy')_i ~ (R f)_i,
/// kernel symmetric in its arguments. `diag_slope(y)` is the average
/// one-sided d/dy' of kernel(y, y') at y' = y.
inline RMatrix pv_matrix(const RealVector& y, const std::function<real(real, real)>& kernel,
                         const std::function<real(real)>& diag_slope, PvScheme scheme)
{
    const int m = static_cast<int>(y.size());
    const real h = 2.0 / (m + 1);
    RMatrix r(m, m);
    RealVector kd(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        kd[i] = kernel(y[i], y[i]);
        r(i, i) = 0.0;
        for (int j = 0; j < i; ++j) {
            const real v = h * kernel(y[i], y[j]) / (y[i] - y[j]);
            r(i, j) = v;
            r(j, i) = -v;
        }
    }
    const RMatrix d = fd_derivative(m, h);
    if (scheme == PvScheme::Symmetric) {
        // 1/2 h (D^T Kd - Kd D)
        for (int i = 0; i < m; ++i)
            for (int j = std::max(0, i - 3); j < std::min(m, i + 4); ++j)
                r(i, j) += 0.5 * h * (d(j, i) * kd[j] - kd[i] * d(i, j));
        return r;
    }
    for (int i = 0; i < m; ++i) {
        real diag = 0.0;
        for (int j = 0; j < m; ++j)
            if (j != i) diag -= h * kd[i] / (y[i] - y[j]);
        diag -= 0.5 * h * kd[i] * (1.0 / (y[i] + 1.0) + 1.0 / (y[i] - 1.0));
        diag -= h * diag_slope(y[i]);
        diag += kd[i] * std::log((1.0 + y[i]) / (1.0 - y[i]));
        r(i, i) = diag;
        for (int j = std::max(0, i - 3); j < std::min(m, i + 4); ++j) r(i, j) -= h * kd[i] * d(i, j);
    }
    return r;
}

inline real sio_prefactor(int k, real delta)
{
    const real ak = std::abs(static_cast<real>(k));
    return (k > 0 ? 1.0 : -1.0) * std::pow(ak, 1.0 - delta);
}

}  // namespace detail

/// Assemble J_k[f](y) = |k|^{1-delta} sgn(k) PV int G_k(y,y') f(y') / (2i (y-y')) dy'.
inline SioOperator assemble_sio(int k, const ChannelGrid& grid, real delta = 0.0,
                                PvScheme scheme = PvScheme::Symmetric)
{
    if (k == 0) throw DomainError("assemble_sio: k must be nonzero");
    const real ak = std::abs(static_cast<real>(k));
    auto kernel = [k](real a, real b) { return green_function(k, a, b); };
    // Average of the one-sided slopes of G_k(y, .) at the diagonal: the smooth
    // part sinh(k zeta) / (2 sinh 2k) of d_y G_k; jump and C^1 parts average out.
    auto slope = [ak](real a) { return 0.5 * sinh_ratio(2.0 * ak * a, 2.0 * ak); };
    const RMatrix r = detail::pv_matrix(grid.y_nodes(), kernel, slope, scheme);
    SioOperator op;
    op.k = k;
    op.matrix = (-0.5 * detail::sio_prefactor(k, delta)) * I * r.cast<cplx>();
    op.quadrature_tag = to_string(scheme);
    op.damping_delta = delta;
    return op;
}

/// Commutator kernel H_k(y, y') = -sinh(k (y + y')) / sinh(2k).
inline real commutator_kernel(int k, real y, real yp)
{
    const real ak = std::abs(static_cast<real>(k));
    return -sinh_ratio(ak * (y + yp), 2.0 * ak);
}

/// Assemble H_k[f] = |k|^{1-delta} sgn(k) PV int H_k(y,y') f(y') / (2i (y-y')) dy',
/// normalised with the same prefactor as J_k so that
/// d_y J_k f - J_k d_y f = -H_k f for every k and delta.
inline CommutatorOperator assemble_commutator(int k, const ChannelGrid& grid, real delta = 0.0,
                                              PvScheme scheme = PvScheme::Symmetric)
{
    if (k == 0) throw DomainError("assemble_commutator: k must be nonzero");
    const real ak = std::abs(static_cast<real>(k));
    auto kernel = [k](real a, real b) { return commutator_kernel(k, a, b); };
    // d_y' H_k(y, y') at y' = y: -k cosh(2ky) / sinh(2k), in scaled form.
    auto slope = [ak](real a) {
        const real e = std::exp(2.0 * ak * (std::abs(a) - 1.0));
        return -ak * e * (1.0 + std::exp(-4.0 * ak * std::abs(a))) / (-std::expm1(-4.0 * ak));
    };
    const RMatrix r = detail::pv_matrix(grid.y_nodes(), kernel, slope, scheme);
    CommutatorOperator op;
    op.k = k;
    op.matrix = (-0.5 * detail::sio_prefactor(k, delta)) * I * r.cast<cplx>();
    return op;
}

inline ComplexVector apply_operator(const Matrix& m, std::span<const cplx> f)
{
    if (static_cast<Eigen::Index>(f.size()) != m.cols()) throw DomainError("apply_operator: length mismatch");
    Eigen::Map<const Vector> v(f.data(), static_cast<Eigen::Index>(f.size()));
    Vector r = m * v;
    return ComplexVector(r.data(), r.data() + r.size());
}

/// Largest singular value in the weighted L2 inner product
/// <f, g> = sum_i w_i conj(f_i) g_i (uniform weights if `weights` is empty).
inline real operator_norm(const Matrix& op, std::span<const real> weights = {})
{
    if (op.rows() != op.cols()) throw DomainError("operator_norm: matrix must be square");
    Matrix a = op;
    if (!weights.empty()) {
        if (static_cast<Eigen::Index>(weights.size()) != op.rows())
            throw DomainError("operator_norm: weight count mismatch");
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) *= std::sqrt(weights[i] / weights[j]);
    }
    if (a.size() == 0) return 0.0;
    const real scale = a.norm();
    if (scale == 0.0) return 0.0;
    if ((a - a.adjoint()).norm() <= 1e-13 * scale) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

inline real operator_norm(const RMatrix& op, std::span<const real> weights = {})
{
    return operator_norm(Matrix(op.cast<cplx>()), weights);
}

/// ||M - M*|| / ||M|| (Frobenius), M* the adjoint in the uniform-weight inner product.
inline real selfadjoint_residual(const Matrix& m)
{
    const real n = m.norm();
    return n == 0.0 ? 0.0 : (m - m.adjoint()).norm() / n;
}

/// Smallest eigenvalue of the Hermitian part of 1 + c_tau J_k.
inline real coercivity_min_eigenvalue(const SioOperator& op, real c_tau)
{
    Matrix a = Matrix::Identity(op.matrix.rows(), op.matrix.cols()) + c_tau * op.matrix;
    a = 0.5 * (a + a.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace hypocouette
