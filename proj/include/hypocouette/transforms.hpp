#pragma once

#include "hypocouette/grid.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <span>
#include <utility>

namespace hypocouette {

namespace detail {

enum class PlanKind { Dst1, Dct1, DftForward, DftBackward };

/// Process-wide FFTW plan cache. Planning is serialised; executing a
/// cached plan through the new-array interface is thread safe.
class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(PlanKind kind, int n)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(static_cast<int>(kind), n);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        fftw_plan plan = nullptr;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        if (kind == PlanKind::Dst1 || kind == PlanKind::Dct1) {
            std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
            plan = fftw_plan_r2r_1d(n, a.data(), b.data(),
                                    kind == PlanKind::Dst1 ? FFTW_RODFT00 : FFTW_REDFT00, flags);
        } else {
            std::vector<fftw_complex> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
            plan = fftw_plan_dft_1d(n, a.data(), b.data(),
                                    kind == PlanKind::DftForward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        }
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

inline void dst1(const double* in, double* out, int n)
{
    fftw_execute_r2r(PlanCache::instance().get(PlanKind::Dst1, n), const_cast<double*>(in), out);
}

inline void dct1(const double* in, double* out, int n)
{
    fftw_execute_r2r(PlanCache::instance().get(PlanKind::Dct1, n), const_cast<double*>(in), out);
}

inline void check_length(std::size_t got, std::size_t want, const char* what)
{
    if (got != want)
        throw DomainError(std::string(what) + ": length " + std::to_string(got) +
                          " does not match expected " + std::to_string(want));
}

}  // namespace detail

// Real transforms. Sine coefficients c_n multiply sin(n pi (y+1)/2); on the
// size-m interior grid node j carries y_j = -1 + 2j/(m+1).

/// Sine coefficients (any count <= m) evaluated on the m interior nodes.
inline RealVector sine_to_nodes(std::span<const real> coeffs, int m)
{
    if (static_cast<int>(coeffs.size()) > m)
        throw DomainError("sine_to_nodes: more coefficients than nodes");
    RealVector in(static_cast<std::size_t>(m), 0.0), out(static_cast<std::size_t>(m));
    std::copy(coeffs.begin(), coeffs.end(), in.begin());
    detail::dst1(in.data(), out.data(), m);
    for (auto& v : out) v *= 0.5;
    return out;
}

/// Interpolating sine coefficients of m nodal values, truncated to n_keep.
inline RealVector nodes_to_sine(std::span<const real> values, int n_keep)
{
    const int m = static_cast<int>(values.size());
    if (n_keep > m) throw DomainError("nodes_to_sine: n_keep exceeds node count");
    RealVector out(static_cast<std::size_t>(m));
    detail::dst1(values.data(), out.data(), m);
    const real scale = 1.0 / (m + 1);
    RealVector c(static_cast<std::size_t>(n_keep));
    for (int n = 0; n < n_keep; ++n) c[n] = out[n] * scale;
    return c;
}

/// Cosine coefficients b_n (n >= 1) of cos(n pi (y+1)/2) on the m interior nodes.
inline RealVector cosine_to_nodes(std::span<const real> coeffs, int m)
{
    if (static_cast<int>(coeffs.size()) > m)
        throw DomainError("cosine_to_nodes: more coefficients than nodes");
    RealVector in(static_cast<std::size_t>(m + 2), 0.0), out(static_cast<std::size_t>(m + 2));
    std::copy(coeffs.begin(), coeffs.end(), in.begin() + 1);
    detail::dct1(in.data(), out.data(), m + 2);
    RealVector v(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) v[j] = 0.5 * out[j + 1];
    return v;
}

// Complex counterparts act on real and imaginary parts independently.

namespace detail {
template <class F>
ComplexVector apply_split(std::span<const cplx> x, F&& f)
{
    RealVector re(x.size()), im(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        re[i] = x[i].real();
        im[i] = x[i].imag();
    }
    RealVector a = f(re), b = f(im);
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = {a[i], b[i]};
    return out;
}
}  // namespace detail

inline ComplexVector sine_to_nodes(std::span<const cplx> coeffs, int m)
{
    return detail::apply_split(coeffs, [m](const RealVector& v) { return sine_to_nodes(std::span<const real>(v), m); });
}

inline ComplexVector nodes_to_sine(std::span<const cplx> values, int n_keep)
{
    return detail::apply_split(values, [n_keep](const RealVector& v) {
        return nodes_to_sine(std::span<const real>(v), n_keep);
    });
}

inline ComplexVector cosine_to_nodes(std::span<const cplx> coeffs, int m)
{
    return detail::apply_split(coeffs, [m](const RealVector& v) { return cosine_to_nodes(std::span<const real>(v), m); });
}

/// Forward sine transform on a grid of n_y nodes: nodal values -> coefficients.
inline ComplexVector sine_transform(std::span<const cplx> values, int ny)
{
    detail::check_length(values.size(), static_cast<std::size_t>(ny), "sine_transform");
    return nodes_to_sine(values, ny);
}

inline ComplexVector inverse_sine_transform(std::span<const cplx> coeffs, int ny)
{
    detail::check_length(coeffs.size(), static_cast<std::size_t>(ny), "inverse_sine_transform");
    return sine_to_nodes(coeffs, ny);
}

/// Out-of-place complex DFT along x (in and out must not alias).
/// Backward: physical values from modes, f(x_l) = sum_k f_k e^{i k x_l}.
/// Forward: unnormalised analysis sum.
inline void dft(const cplx* in, cplx* out, int n, bool forward)
{
    auto plan = detail::PlanCache::instance().get(forward ? detail::PlanKind::DftForward
                                                          : detail::PlanKind::DftBackward, n);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace hypocouette
