#pragma once

#include "hypocouette/grid.hpp"
#include "hypocouette/transforms.hpp"

#include <algorithm>
#include <memory>

namespace hypocouette {

/// Which y-basis a coefficient vector lives in.
///   Sine:   sum c_n sin(n pi (y+1)/2)   (vanishes at y = +-1)
///   Cosine: sum c_n cos(n pi (y+1)/2), n >= 1 (y-derivatives of sine fields)
enum class Basis { Sine, Cosine };

inline const char* to_string(Basis b) { return b == Basis::Sine ? "sine" : "cosine"; }

/// One x-mode: coefficients plus basis tag.
struct ModeVector {
    ComplexVector coeffs;
    Basis basis = Basis::Sine;

    int size() const { return static_cast<int>(coeffs.size()); }
};

/// d/dy of a single mode. Exact at coefficient level; flips the basis tag.
inline ModeVector derivative_y(const ModeVector& f)
{
    ModeVector d{ComplexVector(f.coeffs.size()), f.basis == Basis::Sine ? Basis::Cosine : Basis::Sine};
    const real sign = f.basis == Basis::Sine ? 1.0 : -1.0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        d.coeffs[i] = sign * ChannelGrid::mode_wavenumber(static_cast<int>(i) + 1) * f.coeffs[i];
    return d;
}

/// Values on the m interior nodes of a size-m sine grid.
inline ComplexVector to_nodes(const ModeVector& f, int m)
{
    return f.basis == Basis::Sine ? sine_to_nodes(std::span<const cplx>(f.coeffs), m)
                                  : cosine_to_nodes(std::span<const cplx>(f.coeffs), m);
}

inline ComplexVector to_nodes(const ModeVector& f) { return to_nodes(f, f.size()); }

/// Values at y = -1 and y = +1.
inline std::pair<cplx, cplx> boundary_values(const ModeVector& f)
{
    if (f.basis == Basis::Sine) return {0.0, 0.0};
    cplx lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        lo += f.coeffs[i];
        hi += (n % 2 == 0 ? 1.0 : -1.0) * f.coeffs[i];
    }
    return {lo, hi};
}

/// Point evaluation of the series at an arbitrary y.
inline cplx evaluate(const ModeVector& f, real y)
{
    cplx s = 0.0;
    const real theta = 0.5 * pi * (y + 1.0);
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        const real n = static_cast<real>(i + 1);
        s += f.coeffs[i] * (f.basis == Basis::Sine ? std::sin(n * theta) : std::cos(n * theta));
    }
    return s;
}

/// L2 inner product <a, b> = int conj(a) b dy of two resolved series.
/// Same-basis pairs reduce to the coefficient sum (both bases are
/// orthonormal); sine/cosine pairs use the closed-form integrals
/// int_{-1}^{1} sin(n th) cos(m th) dy = (2/pi) n (1 - (-1)^{n+m}) / (n^2 - m^2).
inline cplx inner(const ModeVector& a, const ModeVector& b)
{
    if (a.size() != b.size()) throw DomainError("inner: size mismatch");
    cplx s = 0.0;
    if (a.basis == b.basis) {
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) s += std::conj(a.coeffs[i]) * b.coeffs[i];
        return s;
    }
    const bool a_sine = a.basis == Basis::Sine;
    const int n = a.size();
    for (int i = 1; i <= n; ++i) {
        for (int j = (i % 2 == 0) ? 1 : 2; j <= n; j += 2) {  // n + m odd only
            const int ns = a_sine ? i : j, nc = a_sine ? j : i;
            const real w = 2.0 / pi * 2.0 * ns / (static_cast<real>(ns) * ns - static_cast<real>(nc) * nc);
            s += w * std::conj(a.coeffs[i - 1]) * b.coeffs[j - 1];
        }
    }
    return s;
}

/// Squared L2 norm of a mode.
inline real norm2(const ModeVector& f)
{
    real s = 0.0;
    for (const auto& c : f.coeffs) s += std::norm(c);
    return s;
}

/// sum_n lambda_n^p |c_n|^2 with lambda_n = (n pi / 2)^2.
inline real weighted_norm2(const ComplexVector& c, int p)
{
    real s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const real lam = std::pow(ChannelGrid::mode_wavenumber(static_cast<int>(i) + 1), 2);
        s += std::pow(lam, p) * std::norm(c[i]);
    }
    return s;
}

/// Nodal inner product on the interior nodes with uniform weight h; matches
/// the quadrature used by the singular integral operators.
inline cplx nodal_inner(std::span<const cplx> a, std::span<const cplx> b, real h)
{
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return h * s;
}

/// Complex y-coefficients for every retained x-wavenumber k in {-K..K}.
class SpectralField {
public:
    SpectralField() = default;

    SpectralField(std::shared_ptr<const ChannelGrid> grid, Basis basis = Basis::Sine)
        : grid_(std::move(grid)), basis_(basis),
          modes_(static_cast<std::size_t>(grid_->n_modes_x()),
                 ComplexVector(static_cast<std::size_t>(grid_->ny()), 0.0))
    {
    }

    const ChannelGrid& grid() const { return *grid_; }
    const std::shared_ptr<const ChannelGrid>& grid_ptr() const { return grid_; }
    Basis basis() const { return basis_; }
    int kmax() const { return grid_->kmax(); }

    ComplexVector& mode(int k) { return modes_.at(static_cast<std::size_t>(k + kmax())); }
    const ComplexVector& mode(int k) const { return modes_.at(static_cast<std::size_t>(k + kmax())); }

    ModeVector mode_vector(int k) const { return {mode(k), basis_}; }

    void set_mode(int k, const ModeVector& m)
    {
        if (m.basis != basis_) throw DomainError("SpectralField::set_mode: basis tag mismatch");
        if (m.size() != grid_->ny()) throw DomainError("SpectralField::set_mode: length mismatch");
        mode(k) = m.coeffs;
    }

    /// max_k max_n |f_{-k,n} - conj(f_{k,n})|, plus |Im f_0|.
    real reality_defect() const
    {
        real d = 0.0;
        for (int k = 0; k <= kmax(); ++k) {
            const auto& p = mode(k);
            const auto& m = mode(-k);
            for (std::size_t n = 0; n < p.size(); ++n) d = std::max(d, std::abs(m[n] - std::conj(p[n])));
        }
        return d;
    }

    /// Project onto real fields: f_{-k} := conj(f_k), f_0 real.
    void enforce_reality()
    {
        for (int k = 1; k <= kmax(); ++k) {
            auto& p = mode(k);
            auto& m = mode(-k);
            for (std::size_t n = 0; n < p.size(); ++n) {
                const cplx avg = 0.5 * (p[n] + std::conj(m[n]));
                p[n] = avg;
                m[n] = std::conj(avg);
            }
        }
        for (auto& c : mode(0)) c = c.real();
    }

    /// L2(T x [-1,1]) norm squared, with T of length 2 pi.
    real l2_norm2() const
    {
        real s = 0.0;
        for (const auto& m : modes_)
            for (const auto& c : m) s += std::norm(c);
        return 2.0 * pi * s;
    }

    bool is_zero() const
    {
        for (const auto& m : modes_)
            for (const auto& c : m)
                if (c != cplx{0.0, 0.0}) return false;
        return true;
    }

    SpectralField& operator+=(const SpectralField& o)
    {
        for (std::size_t i = 0; i < modes_.size(); ++i)
            for (std::size_t n = 0; n < modes_[i].size(); ++n) modes_[i][n] += o.modes_[i][n];
        return *this;
    }

    SpectralField& operator*=(cplx s)
    {
        for (auto& m : modes_)
            for (auto& c : m) c *= s;
        return *this;
    }

private:
    std::shared_ptr<const ChannelGrid> grid_;
    Basis basis_ = Basis::Sine;
    std::vector<ComplexVector> modes_;
};

/// d/dy of every mode; the result carries the flipped basis tag.
inline SpectralField derivative_y(const SpectralField& f)
{
    SpectralField d(f.grid_ptr(), f.basis() == Basis::Sine ? Basis::Cosine : Basis::Sine);
    for (int k = -f.kmax(); k <= f.kmax(); ++k) d.mode(k) = derivative_y(f.mode_vector(k)).coeffs;
    return d;
}

}  // namespace hypocouette
