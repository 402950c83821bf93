#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypocouette {

using real = double;
using cplx = std::complex<double>;
using RealVector = std::vector<real>;
using ComplexVector = std::vector<cplx>;

inline constexpr real pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Thrown when an argument violates an operation's precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Discretisation of the periodic channel T x [-1, 1].
///
/// x: Fourier modes k in {-kmax, ..., kmax}.
/// y: sine modes sin(n pi (y + 1) / 2), n = 1..ny, collocated on the
///    ny equispaced interior nodes y_j = -1 + 2 j / (ny + 1).
///
/// Nonlinear (and variable-coefficient) products are evaluated on
/// padded grids sized so that the retained modes occupy the fraction
/// `dealias_fraction` of the resolvable band; 2/3 gives exact removal
/// of quadratic aliasing.
class ChannelGrid {
public:
    ChannelGrid(int kmax, int ny, real dealias_fraction = 2.0 / 3.0)
        : kmax_(kmax), ny_(ny), dealias_(dealias_fraction)
    {
        if (ny < 8) throw DomainError("ChannelGrid: n_y must be >= 8");
        if (kmax < 1) throw DomainError("ChannelGrid: n_x must be >= 1");
        if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
            throw DomainError("ChannelGrid: dealias_fraction must lie in (0, 1]");
        nodes_.resize(static_cast<std::size_t>(ny));
        for (int j = 1; j <= ny; ++j) nodes_[j - 1] = -1.0 + 2.0 * j / (ny + 1);
    }

    int kmax() const { return kmax_; }
    int n_x() const { return kmax_; }
    int ny() const { return ny_; }
    int n_modes_x() const { return 2 * kmax_ + 1; }
    real dealias_fraction() const { return dealias_; }

    /// Interior collocation nodes, strictly increasing in (-1, 1).
    const RealVector& y_nodes() const { return nodes_; }

    /// Uniform node spacing; also the interior trapezoid weight.
    real h() const { return 2.0 / (ny_ + 1); }

    /// Wavenumber of sine mode n in y.
    static real mode_wavenumber(int n) { return 0.5 * n * pi; }

    /// Padded interior-node count used for y products.
    int padded_ny() const { return padded_size(ny_); }

    /// Physical x points used for products (>= 3 kmax + 1 at fraction 2/3).
    int padded_nx() const
    {
        return static_cast<int>(std::ceil(2.0 * kmax_ / dealias_ - 1e-9)) + 1;
    }

    int padded_size(int n) const
    {
        return std::max(n, static_cast<int>(std::ceil(n / dealias_ - 1e-9)));
    }

    bool operator==(const ChannelGrid& o) const
    {
        return kmax_ == o.kmax_ && ny_ == o.ny_ && dealias_ == o.dealias_;
    }

private:
    int kmax_;
    int ny_;
    real dealias_;
    RealVector nodes_;
};

/// Interior nodes of an arbitrary-size sine grid.
inline RealVector interior_nodes(int n)
{
    RealVector y(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) y[j - 1] = -1.0 + 2.0 * j / (n + 1);
    return y;
}

/// sinh(a) / sinh(b) for |a| <= b, without overflow for large arguments.
inline real sinh_ratio(real a, real b)
{
    if (b == 0.0) return 1.0;
    if (b < 30.0) return std::sinh(a) / std::sinh(b);
    const real s = a < 0 ? -1.0 : 1.0;
    const real aa = std::abs(a);
    // e^{|a|-b} (1 - e^{-2|a|}) / (1 - e^{-2b})
    return s * std::exp(aa - b) * (-std::expm1(-2.0 * aa)) / (-std::expm1(-2.0 * b));
}

}  // namespace hypocouette
