#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "vvfx/bs_engine.hpp"
#include "vvfx/errors.hpp"
#include "vvfx/market_conventions.hpp"
#include "vvfx/option_spec.hpp"

namespace vvfx {

enum class VicinityVariant { Surv, Fet };

struct Barriers {
    std::optional<double> lower;
    std::optional<double> upper;

    [[nodiscard]] bool empty() const noexcept { return !lower && !upper; }
    friend bool operator==(const Barriers&, const Barriers&) = default;
};

[[nodiscard]] inline Barriers barriers_of(const OptionSpec& s) { return {s.lower_barrier, s.upper_barrier}; }

/// Log-spot finite-difference grid for the first-exit-time PDE.
struct PdeGrid {
    int nodes = 400;
    int steps = 400;
    int implicit_steps = 4;           // fully implicit start-up steps before Crank-Nicolson
    double far_boundary_sd = 8.0;     // absent barrier replaced at spot * exp(+-far_boundary_sd * sigma * sqrt(tau))
    bool refinement_check = true;     // re-solve at twice the resolution and compare
    double refinement_tol = 1e-3;

    void validate() const {
        if (nodes < 50 || steps < 50) throw ValidationError("pde grid: nodes and steps must be >= 50");
        if (implicit_steps < 0 || implicit_steps > steps) throw ValidationError("pde grid: bad implicit_steps");
        if (!(far_boundary_sd > 0.0)) throw ValidationError("pde grid: far_boundary_sd must be > 0");
    }
};

/// Barrier-vicinity measure: 0 at a barrier, 1 far from all barriers.
struct VicinityMeasure {
    double gamma = 1.0;
    double domestic = 1.0;  // p^d or lambda^d / tau
    double foreign = 1.0;   // p^f or lambda^f / tau
    bool warning = false;   // series non-convergence or failed grid refinement check
    double refinement_change = 0.0;
};

namespace detail {

[[nodiscard]] inline bool at_or_beyond(const Barriers& b, double spot) {
    return (b.lower && spot <= *b.lower) || (b.upper && spot >= *b.upper);
}

[[nodiscard]] inline double no_touch_any(const Barriers& b, double spot, double mu, double sigma, double tau,
                                         bool& warn) {
    if (b.lower && b.upper) {
        const auto r = double_no_touch_probability(spot, *b.lower, *b.upper, mu, sigma, tau);
        warn = warn || !r.converged;
        return r.value;
    }
    if (b.lower) return no_touch_probability(spot, *b.lower, BarrierSide::Lower, mu, sigma, tau);
    return no_touch_probability(spot, *b.upper, BarrierSide::Upper, mu, sigma, tau);
}

/// Thomas algorithm; a is the sub-diagonal (a[0] unused), c the super-diagonal.
inline void solve_tridiagonal(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                              std::vector<double>& d) {
    const std::size_t n = d.size();
    std::vector<double> cp(n);
    double denom = b[0];
    cp[0] = c[0] / denom;
    d[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / denom;
        d[i] = (d[i] - a[i] * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= cp[i] * d[i + 1];
}

/// Four-point Lagrange interpolation of nodal values on a uniform grid.
[[nodiscard]] inline double cubic_at(const std::vector<double>& u, double x0, double h, double x) {
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    auto j = static_cast<std::ptrdiff_t>(std::floor((x - x0) / h)) - 1;
    j = std::clamp<std::ptrdiff_t>(j, 0, n - 4);
    const double t = (x - x0) / h - static_cast<double>(j);
    const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    return l0 * u[j] + l1 * u[j + 1] + l2 * u[j + 2] + l3 * u[j + 3];
}

/// Expected min(first exit time, tau) at `spot` for a GBM with drift `mu`, from
///   du/dtheta = 0.5 sigma^2 u_xx + (mu - 0.5 sigma^2) u_x,  x = ln S, theta = time to expiry,
/// with u = tau at theta = 0 and u = tau - theta on barrier nodes. A missing barrier side gets
/// a far node carrying u_xx = 0 instead.
[[nodiscard]] inline double expected_exit_time(const Barriers& b, double spot, double mu, double sigma, double tau,
                                               int nodes, int steps, int implicit_steps, double far_sd) {
    const double x_spot = std::log(spot);
    const double far = far_sd * sigma * std::sqrt(tau);
    const bool lo_dirichlet = b.lower && std::log(*b.lower) > x_spot - far;
    const bool hi_dirichlet = b.upper && std::log(*b.upper) < x_spot + far;
    if (!lo_dirichlet && !hi_dirichlet) return tau;
    const double x_lo = lo_dirichlet ? std::log(*b.lower) : x_spot - far;
    const double x_hi = hi_dirichlet ? std::log(*b.upper) : x_spot + far;
    const int n_int = nodes - 2;  // unknowns at nodes 1..nodes-2
    const double h = (x_hi - x_lo) / (nodes - 1);
    const double dt = tau / steps;
    const double diff = 0.5 * sigma * sigma;
    const double conv = mu - 0.5 * sigma * sigma;

    // spatial operator row i (interior node i+1): lo*u[i] + di*u[i+1] + up*u[i+2]
    std::vector<double> lo(n_int, diff / (h * h) - conv / (2.0 * h));
    std::vector<double> di(n_int, -2.0 * diff / (h * h));
    std::vector<double> up(n_int, diff / (h * h) + conv / (2.0 * h));
    if (!lo_dirichlet) {  // node 0 eliminated through u0 = 2 u1 - u2
        lo[0] = 0.0;
        di[0] = -conv / h;
        up[0] = conv / h;
    }
    if (!hi_dirichlet) {
        lo[n_int - 1] = -conv / h;
        di[n_int - 1] = conv / h;
        up[n_int - 1] = 0.0;
    }

    std::vector<double> u(nodes, tau);
    std::vector<double> a(n_int), bd(n_int), c(n_int), rhs(n_int);
    for (int n = 0; n < steps; ++n) {
        const double theta_new = (n + 1) * dt;
        const double g_new = tau - theta_new;
        const double w = n < implicit_steps ? 1.0 : 0.5;  // weight of the new time level
        for (int i = 0; i < n_int; ++i) {
            const double lu = lo[i] * u[i] + di[i] * u[i + 1] + up[i] * u[i + 2];
            rhs[i] = u[i + 1] + (1.0 - w) * dt * lu;
            a[i] = -w * dt * lo[i];
            bd[i] = 1.0 - w * dt * di[i];
            c[i] = -w * dt * up[i];
        }
        // Dirichlet contributions of the new level move to the right-hand side; the old level
        // is already inside lu through u[0] / u[nodes-1]
        if (lo_dirichlet) rhs[0] += w * dt * lo[0] * g_new;
        if (hi_dirichlet) rhs[n_int - 1] += w * dt * up[n_int - 1] * g_new;
        a[0] = 0.0;
        c[n_int - 1] = 0.0;
        solve_tridiagonal(a, bd, c, rhs);
        for (int i = 0; i < n_int; ++i) u[i + 1] = rhs[i];
        u[0] = lo_dirichlet ? g_new : 2.0 * u[1] - u[2];
        u[nodes - 1] = hi_dirichlet ? g_new : 2.0 * u[nodes - 2] - u[nodes - 3];
    }
    return std::clamp(cubic_at(u, x_lo, h, x_spot), 0.0, tau);
}

}  // namespace detail

/// gamma_surv = (p^d + p^f) / 2: no-touch probabilities under the domestic measure (drift
/// r_d - r_f) and the foreign measure (drift r_d - r_f + sigma^2).
[[nodiscard]] inline VicinityMeasure survival_probability(const Barriers& b, double sigma, const MarketSnapshot& m,
                                                          double tau) {
    detail::require(sigma >= 0.0 && tau > 0.0, "survival_probability: need sigma >= 0 and tau > 0");
    if (b.empty()) return {};
    if (detail::at_or_beyond(b, m.spot)) return {0.0, 0.0, 0.0, false, 0.0};
    const double mu_d = m.r_d - m.r_f;
    bool warn = false;
    const double pd = detail::no_touch_any(b, m.spot, mu_d, sigma, tau, warn);
    const double pf = detail::no_touch_any(b, m.spot, mu_d + sigma * sigma, sigma, tau, warn);
    return {std::clamp(0.5 * (pd + pf), 0.0, 1.0), pd, pf, warn, 0.0};
}

/// gamma_fet = (lambda^d + lambda^f) / (2 tau), lambda being the expected first exit time
/// capped at expiry under each measure, from a Crank-Nicolson solve of the backward equation.
[[nodiscard]] inline VicinityMeasure fet_solve(const Barriers& b, double sigma, const MarketSnapshot& m, double tau,
                                               const PdeGrid& grid = {}) {
    detail::require(sigma >= 0.0 && tau > 0.0, "fet_solve: need sigma >= 0 and tau > 0");
    grid.validate();
    if (b.empty()) return {};
    if (detail::at_or_beyond(b, m.spot)) return {0.0, 0.0, 0.0, false, 0.0};
    if (sigma * std::sqrt(tau) < kDegenerateStdDev) {
        // deterministic path: exit happens only if the drift path reaches a barrier
        auto lam = [&](double mu) {
            auto hit_time = [&](double B) {
                const double t = std::log(B / m.spot) / mu;
                return mu != 0.0 && t > 0.0 ? std::min(t, tau) : tau;
            };
            double t = tau;
            if (b.lower) t = std::min(t, hit_time(*b.lower));
            if (b.upper) t = std::min(t, hit_time(*b.upper));
            return t;
        };
        const double ld = lam(m.r_d - m.r_f) / tau;
        const double lf = lam(m.r_d - m.r_f + sigma * sigma) / tau;
        return {0.5 * (ld + lf), ld, lf, false, 0.0};
    }
    const double mu_d = m.r_d - m.r_f;
    const double mu_f = mu_d + sigma * sigma;
    auto solve = [&](int nodes, int steps) {
        const double ld = detail::expected_exit_time(b, m.spot, mu_d, sigma, tau, nodes, steps, grid.implicit_steps,
                                                     grid.far_boundary_sd);
        const double lf = detail::expected_exit_time(b, m.spot, mu_f, sigma, tau, nodes, steps, grid.implicit_steps,
                                                     grid.far_boundary_sd);
        return VicinityMeasure{std::clamp(0.5 * (ld + lf) / tau, 0.0, 1.0), ld / tau, lf / tau, false, 0.0};
    };
    VicinityMeasure out = solve(grid.nodes, grid.steps);
    if (grid.refinement_check) {
        const VicinityMeasure fine = solve(2 * grid.nodes - 1, 2 * grid.steps);
        out.refinement_change = std::abs(fine.gamma - out.gamma);
        out.warning = out.refinement_change > grid.refinement_tol;
    }
    return out;
}

[[nodiscard]] inline VicinityMeasure vicinity(VicinityVariant v, const Barriers& b, double sigma,
                                              const MarketSnapshot& m, double tau, const PdeGrid& grid = {}) {
    return v == VicinityVariant::Surv ? survival_probability(b, sigma, m, tau) : fet_solve(b, sigma, m, tau, grid);
}

}  // namespace vvfx
