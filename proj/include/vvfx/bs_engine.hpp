#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "vvfx/black_scholes.hpp"
#include "vvfx/errors.hpp"
#include "vvfx/market_conventions.hpp"
#include "vvfx/numerics.hpp"
#include "vvfx/option_spec.hpp"

namespace vvfx {

/// Closed-form price with diagnostics.
struct BsPrice {
    double value = 0.0;
    bool knocked = false;         // a barrier is already breached at valuation
    bool series_warning = false;  // double-barrier series not converged within the term cap
    int series_terms = 0;         // highest image index used by the double-barrier series
};

inline constexpr int kMaxSeriesTerms = 20;
inline constexpr double kSeriesRelTol = 1e-12;

namespace detail {

/// exp(log_coef) * (N(x) - N(y)) for x >= y, without inf*0 when the difference underflows.
[[nodiscard]] inline double scaled_ndiff(double log_coef, double x, double y) {
    double diff = x >= 0.0 && y >= 0.0 ? num::norm_cdf(-y) - num::norm_cdf(-x)
                                       : num::norm_cdf(x) - num::norm_cdf(y);
    if (!(diff > 0.0)) return 0.0;
    return std::exp(log_coef + std::log(diff));
}

/// exp(log_coef) * N(x), guarding N(x) == 0.
[[nodiscard]] inline double scaled_n(double log_coef, double x) {
    const double n = num::norm_cdf(x);
    if (!(n > 0.0)) return 0.0;
    return std::exp(log_coef + std::log(n));
}

/// Probability that a GBM with drift `mu` never touches `barrier` over `tau`.
[[nodiscard]] inline double no_touch_probability(double spot, double barrier, BarrierSide side, double mu,
                                                 double sigma, double tau) {
    if (side == BarrierSide::Upper ? spot >= barrier : spot <= barrier) return 0.0;
    const double nu = mu - 0.5 * sigma * sigma;
    const double sd = sigma * std::sqrt(tau);
    if (sd < kDegenerateStdDev) {
        const double end = spot * std::exp(mu * tau);
        return side == BarrierSide::Upper ? (end < barrier ? 1.0 : 0.0) : (end > barrier ? 1.0 : 0.0);
    }
    const double dist = std::abs(std::log(barrier / spot));
    const double v = side == BarrierSide::Upper ? nu : -nu;
    const double p = num::norm_cdf((dist - v * tau) / sd) -
                     scaled_n(2.0 * v * dist / (sigma * sigma), (-dist - v * tau) / sd);
    return std::clamp(p, 0.0, 1.0);
}

/// Probability of touching `barrier` at least once over `tau`; evaluated from the
/// reflection-principle hitting distribution rather than as 1 - no_touch.
[[nodiscard]] inline double touch_probability(double spot, double barrier, BarrierSide side, double mu,
                                              double sigma, double tau) {
    if (side == BarrierSide::Upper ? spot >= barrier : spot <= barrier) return 1.0;
    const double nu = mu - 0.5 * sigma * sigma;
    const double sd = sigma * std::sqrt(tau);
    if (sd < kDegenerateStdDev) {
        return 1.0 - no_touch_probability(spot, barrier, side, mu, sigma, tau);
    }
    const double dist = std::abs(std::log(barrier / spot));
    const double v = side == BarrierSide::Upper ? nu : -nu;
    const double p = num::norm_cdf((-dist + v * tau) / sd) +
                     scaled_n(2.0 * v * dist / (sigma * sigma), (-dist - v * tau) / sd);
    return std::clamp(p, 0.0, 1.0);
}

struct SeriesResult {
    double value = 0.0;
    int terms = 0;
    bool converged = true;
};

/// Image-series integral of the doubly-killed terminal density of a GBM over [a, b]
/// (L <= a < b <= U), flat barriers:
///   coef_s * DF-free E[S_T; a<S_T<b, no touch] - coef_k * P(a<S_T<b, no touch),
/// each truncated at the first image index n whose +/-n pair contributes less than `tol`.
[[nodiscard]] inline SeriesResult double_barrier_series(double spot, double lower, double upper, double a,
                                                        double b, double carry, double sigma, double tau,
                                                        double coef_s, double coef_k, double tol) {
    SeriesResult out;
    if (!(a < b)) return out;
    const double sd = sigma * std::sqrt(tau);
    const double mu1 = 2.0 * carry / (sigma * sigma) + 1.0;  // also mu3 for flat barriers
    const double drift_term = (carry + 0.5 * sigma * sigma) * tau;
    const double lnS = std::log(spot);
    const double lnL = std::log(lower);
    const double lnU = std::log(upper);
    const double ln_a = std::log(a);
    const double ln_b = std::log(b);

    auto term = [&](int n) {
        const double dn = static_cast<double>(n);
        // ln(S U^{2n} / L^{2n}) and ln(L^{2n+2} / (S U^{2n}))
        const double g1 = lnS + 2.0 * dn * (lnU - lnL);
        const double g3 = (2.0 * dn + 2.0) * lnL - lnS - 2.0 * dn * lnU;
        const double log_c1 = dn * (lnU - lnL);               // ln(U^n / L^n)
        const double log_c3 = (dn + 1.0) * lnL - dn * lnU - lnS;  // ln(L^{n+1} / (U^n S))
        const double d1a = (g1 - ln_a + drift_term) / sd;
        const double d1b = (g1 - ln_b + drift_term) / sd;
        const double d3a = (g3 - ln_a + drift_term) / sd;
        const double d3b = (g3 - ln_b + drift_term) / sd;
        double s_part = 0.0;
        if (coef_s != 0.0) {
            s_part = scaled_ndiff(mu1 * log_c1, d1a, d1b) - scaled_ndiff(mu1 * log_c3, d3a, d3b);
        }
        const double k_part = scaled_ndiff((mu1 - 2.0) * log_c1, d1a - sd, d1b - sd) -
                              scaled_ndiff((mu1 - 2.0) * log_c3, d3a - sd, d3b - sd);
        return coef_s * s_part - coef_k * k_part;
    };

    out.value = term(0);
    out.converged = false;
    for (int n = 1; n <= kMaxSeriesTerms; ++n) {
        const double pair = term(n) + term(-n);
        out.value += pair;
        out.terms = n;
        if (std::abs(pair) < tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

/// Reiner-Rubinstein building blocks (no rebate), with phi = +1 call / -1 put and
/// eta = +1 down / -1 up.
struct RrBlocks {
    double A, B, C, D;
};

[[nodiscard]] inline RrBlocks rr_blocks(double phi, double eta, double spot, double strike, double barrier,
                                        double r_d, double r_f, double sigma, double tau) {
    const double sd = sigma * std::sqrt(tau);
    const double m = (r_d - r_f - 0.5 * sigma * sigma) / (sigma * sigma);
    const double ms = (1.0 + m) * sd;
    const double dff = std::exp(-r_f * tau);
    const double dfd = std::exp(-r_d * tau);
    const double x1 = std::log(spot / strike) / sd + ms;
    const double x2 = std::log(spot / barrier) / sd + ms;
    const double y1 = std::log(barrier * barrier / (spot * strike)) / sd + ms;
    const double y2 = std::log(barrier / spot) / sd + ms;
    const double lhs = std::log(barrier / spot);
    auto a_like = [&](double x) {
        return phi * (spot * dff * num::norm_cdf(phi * x) - strike * dfd * num::norm_cdf(phi * (x - sd)));
    };
    auto c_like = [&](double y) {
        return phi * (spot * dff * scaled_n(2.0 * (m + 1.0) * lhs, eta * y) -
                      strike * dfd * scaled_n(2.0 * m * lhs, eta * (y - sd)));
    };
    return {a_like(x1), a_like(x2), c_like(y1), c_like(y2)};
}

[[nodiscard]] inline bool breached(const OptionSpec& s, double spot) {
    return (s.lower_barrier && spot <= *s.lower_barrier) || (s.upper_barrier && spot >= *s.upper_barrier);
}

/// Deterministic forward-path valuation used when sigma*sqrt(tau) vanishes.
[[nodiscard]] inline BsPrice degenerate_price(const OptionSpec& s, const MarketSnapshot& m) {
    const double tau = s.tau;
    const double fwd = forward_price(m, tau);
    const double dfd = m.df_d(tau);
    const double path_min = std::min(m.spot, fwd);
    const double path_max = std::max(m.spot, fwd);
    const bool hit_lower = s.lower_barrier && path_min <= *s.lower_barrier;
    const bool hit_upper = s.upper_barrier && path_max >= *s.upper_barrier;
    const bool hit = hit_lower || hit_upper;
    const double intrinsic =
        has_strike(s.kind) ? dfd * std::max(side_sign(payoff_side(s.kind)) * (fwd - s.K()), 0.0) : 0.0;
    BsPrice out;
    out.knocked = breached(s, m.spot);
    switch (s.kind) {
        case OptionKind::VanillaCall:
        case OptionKind::VanillaPut: out.value = intrinsic; break;
        case OptionKind::UpOutCall:
        case OptionKind::DownOutCall:
        case OptionKind::UpOutPut:
        case OptionKind::DownOutPut:
        case OptionKind::DKOCall:
        case OptionKind::DKOPut: out.value = hit ? 0.0 : intrinsic; break;
        case OptionKind::UpInCall:
        case OptionKind::DownInCall:
        case OptionKind::UpInPut:
        case OptionKind::DownInPut:
        case OptionKind::DKICall:
        case OptionKind::DKIPut: out.value = hit ? intrinsic : 0.0; break;
        case OptionKind::KIKOCall:
        case OptionKind::KIKOPut: {
            const bool in = s.knock_in_barrier == BarrierSide::Lower ? hit_lower : hit_upper;
            const bool out_hit = s.knock_in_barrier == BarrierSide::Lower ? hit_upper : hit_lower;
            out.value = in && !out_hit ? intrinsic : 0.0;
            break;
        }
        case OptionKind::OneTouch:
        case OptionKind::DoubleOneTouch: out.value = hit ? dfd : 0.0; break;
        case OptionKind::NoTouch:
        case OptionKind::DoubleNoTouch: out.value = hit ? 0.0 : dfd; break;
    }
    return out;
}

}  // namespace detail

/// Continuously monitored single-barrier knock-out or knock-in (Reiner-Rubinstein, no rebate).
[[nodiscard]] inline BsPrice single_barrier_price(const OptionSpec& s, double sigma, const MarketSnapshot& m) {
    const double tau = s.tau;
    const double spot = m.spot;
    const double K = s.K();
    const bool up = s.upper_barrier.has_value();
    const double barrier = up ? s.H() : s.L();
    const bool knock_in = s.kind == OptionKind::UpInCall || s.kind == OptionKind::DownInCall ||
                          s.kind == OptionKind::UpInPut || s.kind == OptionKind::DownInPut;
    const OptionSide side = payoff_side(s.kind);
    if (detail::breached(s, spot)) {
        return {knock_in ? vanilla_price(side, m, K, sigma, tau) : 0.0, true, false, 0};
    }
    if (sigma * std::sqrt(tau) < kDegenerateStdDev) return detail::degenerate_price(s, m);

    const double phi = side_sign(side);
    const double eta = up ? -1.0 : 1.0;
    const auto [A, B, C, D] = detail::rr_blocks(phi, eta, spot, K, barrier, m.r_d, m.r_f, sigma, tau);
    const bool k_above = K >= barrier;
    double v = 0.0;
    switch (s.kind) {
        case OptionKind::DownOutCall: v = k_above ? A - C : B - D; break;
        case OptionKind::UpOutCall: v = k_above ? 0.0 : A - B + C - D; break;
        case OptionKind::DownOutPut: v = k_above ? A - B + C - D : 0.0; break;
        case OptionKind::UpOutPut: v = k_above ? B - D : A - C; break;
        case OptionKind::DownInCall: v = k_above ? C : A - B + D; break;
        case OptionKind::UpInCall: v = k_above ? A : B - C + D; break;
        case OptionKind::DownInPut: v = k_above ? B - C + D : A; break;
        case OptionKind::UpInPut: v = k_above ? A - B + D : C; break;
        default: throw DomainError("single_barrier_price: not a single-barrier strike product");
    }
    return {std::max(v, 0.0), false, false, 0};
}

/// Double knock-out call/put from the Ikeda-Kunitomo image series with flat barriers.
[[nodiscard]] inline BsPrice dko_price(const OptionSpec& s, double sigma, const MarketSnapshot& m) {
    const double L = s.L();
    const double U = s.H();
    const double K = s.K();
    const double spot = m.spot;
    if (spot <= L || spot >= U) return {0.0, true, false, 0};
    if (sigma * std::sqrt(s.tau) < kDegenerateStdDev) return detail::degenerate_price(s, m);
    const double tol = kSeriesRelTol * spot;
    const double carry = m.r_d - m.r_f;
    const double cs = spot * m.df_f(s.tau);
    const double ck = K * m.df_d(s.tau);
    detail::SeriesResult r;
    if (payoff_side(s.kind) == OptionSide::Call) {
        r = detail::double_barrier_series(spot, L, U, std::max(K, L), U, carry, sigma, s.tau, cs, ck, tol);
    } else {
        r = detail::double_barrier_series(spot, L, U, L, std::min(K, U), carry, sigma, s.tau, -cs, -ck, tol);
    }
    return {std::max(r.value, 0.0), false, !r.converged, r.terms};
}

/// Probability of staying strictly inside (L, U) up to tau for a GBM with drift `mu`.
[[nodiscard]] inline detail::SeriesResult double_no_touch_probability(double spot, double L, double U, double mu,
                                                                      double sigma, double tau) {
    if (spot <= L || spot >= U) return {0.0, 0, true};
    if (sigma * std::sqrt(tau) < kDegenerateStdDev) {
        const double end = spot * std::exp(mu * tau);
        return {(end > L && end < U) ? 1.0 : 0.0, 0, true};
    }
    auto r = detail::double_barrier_series(spot, L, U, L, U, mu, sigma, tau, 0.0, -1.0, kSeriesRelTol);
    r.value = std::clamp(r.value, 0.0, 1.0);
    return r;
}

/// One-touch, no-touch, double-one-touch and double-no-touch paying one unit of Ccy2.
[[nodiscard]] inline BsPrice touch_price(const OptionSpec& s, double sigma, const MarketSnapshot& m) {
    const double tau = s.tau;
    const double dfd = m.df_d(tau);
    const double mu = m.r_d - m.r_f;
    const bool knocked = detail::breached(s, m.spot);
    switch (s.kind) {
        case OptionKind::OneTouch:
        case OptionKind::NoTouch: {
            const bool up = s.upper_barrier.has_value();
            const double B = up ? s.H() : s.L();
            const auto side = up ? BarrierSide::Upper : BarrierSide::Lower;
            const double p = s.kind == OptionKind::OneTouch
                                 ? detail::touch_probability(m.spot, B, side, mu, sigma, tau)
                                 : detail::no_touch_probability(m.spot, B, side, mu, sigma, tau);
            return {dfd * p, knocked, false, 0};
        }
        case OptionKind::DoubleOneTouch:
        case OptionKind::DoubleNoTouch: {
            const auto r = double_no_touch_probability(m.spot, s.L(), s.H(), mu, sigma, tau);
            const double dnt = dfd * r.value;
            return {s.kind == OptionKind::DoubleNoTouch ? dnt : dfd - dnt, knocked, !r.converged, r.terms};
        }
        default: throw DomainError("touch_price: not a touch product");
    }
}

/// Black-Scholes value of any supported instrument (per unit notional).
[[nodiscard]] inline BsPrice bs_price(const OptionSpec& s, double sigma, const MarketSnapshot& m) {
    detail::require(sigma >= 0.0, "bs_price: negative sigma");
    detail::require(s.tau > 0.0, "bs_price: tau must be > 0");
    switch (s.kind) {
        case OptionKind::VanillaCall:
        case OptionKind::VanillaPut:
            return {vanilla_price(payoff_side(s.kind), m, s.K(), sigma, s.tau), false, false, 0};
        case OptionKind::UpOutCall:
        case OptionKind::DownOutCall:
        case OptionKind::UpOutPut:
        case OptionKind::DownOutPut:
        case OptionKind::UpInCall:
        case OptionKind::DownInCall:
        case OptionKind::UpInPut:
        case OptionKind::DownInPut:
            return single_barrier_price(s, sigma, m);
        case OptionKind::DKOCall:
        case OptionKind::DKOPut:
            return dko_price(s, sigma, m);
        case OptionKind::DKICall:
        case OptionKind::DKIPut: {
            if (detail::breached(s, m.spot)) {
                return {vanilla_price(payoff_side(s.kind), m, s.K(), sigma, s.tau), true, false, 0};
            }
            OptionSpec ko = s;
            ko.kind = payoff_side(s.kind) == OptionSide::Call ? OptionKind::DKOCall : OptionKind::DKOPut;
            const auto d = dko_price(ko, sigma, m);
            const double van = vanilla_price(payoff_side(s.kind), m, s.K(), sigma, s.tau);
            return {std::max(van - d.value, 0.0), false, d.series_warning, d.series_terms};
        }
        case OptionKind::KIKOCall:
        case OptionKind::KIKOPut: {
            // KIKO = KO(knock-out barrier) - DKO(both barriers)
            const bool call = payoff_side(s.kind) == OptionSide::Call;
            OptionSpec ko = s;
            if (s.knock_in_barrier == BarrierSide::Lower) {
                ko.kind = call ? OptionKind::UpOutCall : OptionKind::UpOutPut;
                ko.lower_barrier.reset();
            } else {
                ko.kind = call ? OptionKind::DownOutCall : OptionKind::DownOutPut;
                ko.upper_barrier.reset();
            }
            const auto single = single_barrier_price(ko, sigma, m);
            OptionSpec dko = s;
            dko.kind = call ? OptionKind::DKOCall : OptionKind::DKOPut;
            const auto d = dko_price(dko, sigma, m);
            return {std::max(single.value - d.value, 0.0), detail::breached(s, m.spot), d.series_warning,
                    d.series_terms};
        }
        case OptionKind::OneTouch:
        case OptionKind::NoTouch:
        case OptionKind::DoubleOneTouch:
        case OptionKind::DoubleNoTouch:
            return touch_price(s, sigma, m);
    }
    throw DomainError("bs_price: unsupported kind");
}

}  // namespace vvfx
