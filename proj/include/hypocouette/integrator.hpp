#pragma once

#include "hypocouette/grid.hpp"

#include <functional>
#include <stdexcept>

namespace hypocouette {

/// Step size exceeded the advective stability bound of explicit RK4.
class CflViolation : public std::runtime_error {
public:
    CflViolation(real cfl, real limit)
        : std::runtime_error("CFL number " + std::to_string(cfl) + " exceeds the stability limit " +
                             std::to_string(limit)),
          cfl_(cfl)
    {
    }
    real cfl() const { return cfl_; }

private:
    real cfl_;
};

/// Largest admissible CFL number. RK4 is stable on the imaginary axis up to
/// |lambda dt| = 2.83; with the cell sizes used here that is CFL ~ 0.9.
inline constexpr real kCflLimit = 0.9;
inline constexpr real kDefaultCfl = 0.5;

/// Blocks of coefficient vectors (one per x-mode) evolved together.
using Blocks = std::vector<ComplexVector>;

/// Diagonal linear decay rates (u' = -rate u + N(t, u)), one per coefficient.
using Rates = std::vector<RealVector>;

/// One Lawson (integrating-factor) RK4 step for u' = -rate u + N(t, u).
/// The diagonal part is integrated exactly; N is sampled at t, t + h/2, t + h.
inline Blocks lawson_rk4(const Blocks& u, const Rates& rate, real t, real h,
                         const std::function<Blocks(real, const Blocks&)>& nonlinear)
{
    if (h == 0.0) return u;
    const std::size_t nb = u.size();
    Rates e1(nb), e2(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        e1[b].resize(u[b].size());
        e2[b].resize(u[b].size());
        for (std::size_t i = 0; i < u[b].size(); ++i) {
            e1[b][i] = std::exp(-rate[b][i] * 0.5 * h);
            e2[b][i] = e1[b][i] * e1[b][i];
        }
    }
    auto combine = [&](auto&& f) {
        Blocks out(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            out[b].resize(u[b].size());
            for (std::size_t i = 0; i < u[b].size(); ++i) out[b][i] = f(b, i);
        }
        return out;
    };
    const Blocks k1 = nonlinear(t, u);
    const Blocks u2 = combine([&](std::size_t b, std::size_t i) { return e1[b][i] * (u[b][i] + 0.5 * h * k1[b][i]); });
    const Blocks k2 = nonlinear(t + 0.5 * h, u2);
    const Blocks u3 = combine([&](std::size_t b, std::size_t i) { return e1[b][i] * u[b][i] + 0.5 * h * k2[b][i]; });
    const Blocks k3 = nonlinear(t + 0.5 * h, u3);
    const Blocks u4 = combine([&](std::size_t b, std::size_t i) { return e2[b][i] * u[b][i] + h * e1[b][i] * k3[b][i]; });
    const Blocks k4 = nonlinear(t + h, u4);
    return combine([&](std::size_t b, std::size_t i) {
        return e2[b][i] * u[b][i] +
               h / 6.0 * (e2[b][i] * k1[b][i] + 2.0 * e1[b][i] * (k2[b][i] + k3[b][i]) + k4[b][i]);
    });
}

}  // namespace hypocouette
