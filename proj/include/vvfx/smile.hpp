#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "vvfx/black_scholes.hpp"
#include "vvfx/errors.hpp"
#include "vvfx/market_conventions.hpp"
#include "vvfx/numerics.hpp"
#include "vvfx/vv_weights.hpp"

namespace vvfx {

enum class BfKind { OneVol, TwoVol };

/// Broker quotes for one tenor. Vols are decimals (0.1685, not 16.85).
struct TenorQuote {
    double tau = 1.0;
    double sigma_atm = 0.1;
    double sigma_rr25 = 0.0;
    double sigma_bf25 = 0.0;
    BfKind bf_kind = BfKind::TwoVol;

    [[nodiscard]] double call_wing_vol() const noexcept { return sigma_atm + sigma_bf25 + 0.5 * sigma_rr25; }
    [[nodiscard]] double put_wing_vol() const noexcept { return sigma_atm + sigma_bf25 - 0.5 * sigma_rr25; }

    void validate() const {
        if (!(tau > 0.0)) throw ValidationError("tenor quote: tau must be > 0");
        if (!(sigma_atm > 0.0)) throw ValidationError("tenor quote: sigma_atm must be > 0");
        if (bf_kind == BfKind::TwoVol && !(call_wing_vol() > 0.0 && put_wing_vol() > 0.0)) {
            throw ValidationError("tenor quote: 25-delta pillar vols must be positive");
        }
    }
};

struct SmilePillar {
    double strike;
    double vol;
};

enum class SmileRule {
    VannaVolga,  // three-pillar closed-form vanna-volga interpolation
    Quadratic,   // sigma(Y) = sigma_atm + b Y + c Y^2 with Y = ln(K / K_atm)
};

inline constexpr double kVolFloor = 1e-4;

/// Immutable per-tenor smile: three pillars (25d put, ATM, 25d call) plus the rule that
/// gives sigma(K) between and beyond them.
class SmileCurve {
public:
    SmileCurve(std::array<SmilePillar, 3> pillars, MarketSnapshot snapshot, Conventions conv, double tau,
               SmileRule rule = SmileRule::VannaVolga, double quad_b = 0.0, double quad_c = 0.0)
        : pillars_(pillars), snapshot_(snapshot), conv_(conv), tau_(tau), rule_(rule), b_(quad_b), c_(quad_c) {
        if (!(pillars_[0].strike < pillars_[1].strike && pillars_[1].strike < pillars_[2].strike)) {
            throw ConstructionError("smile: pillar strikes must satisfy K_25P < K_ATM < K_25C");
        }
        for (const auto& p : pillars_) {
            if (!(p.vol > 0.0)) throw ConstructionError("smile: pillar vols must be positive");
        }
    }

    [[nodiscard]] const std::array<SmilePillar, 3>& pillars() const noexcept { return pillars_; }
    [[nodiscard]] const MarketSnapshot& snapshot() const noexcept { return snapshot_; }
    [[nodiscard]] const Conventions& conventions() const noexcept { return conv_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] double sigma_atm() const noexcept { return pillars_[1].vol; }
    [[nodiscard]] double k_atm() const noexcept { return pillars_[1].strike; }
    [[nodiscard]] SmileRule rule() const noexcept { return rule_; }
    [[nodiscard]] double sigma_rr25() const noexcept { return pillars_[2].vol - pillars_[0].vol; }
    [[nodiscard]] double sigma_bf25_2vol() const noexcept {
        return 0.5 * (pillars_[2].vol + pillars_[0].vol) - pillars_[1].vol;
    }

    /// Implied vol at `strike`.
    [[nodiscard]] double vol_at_strike(double strike) const {
        detail::require(strike > 0.0, "vol_at_strike: strike must be > 0");
        if (rule_ == SmileRule::Quadratic) {
            const double y = std::log(strike / k_atm());
            return std::max(sigma_atm() + b_ * y + c_ * y * y, kVolFloor);
        }
        for (const auto& p : pillars_) {
            if (strike == p.strike) return p.vol;
        }
        const std::array<double, 3> ks{pillars_[0].strike, pillars_[1].strike, pillars_[2].strike};
        const double s0 = sigma_atm();
        const auto w = closed_form_weights(strike, ks, snapshot_, tau_, s0);
        // out-of-the-money side for a well-conditioned inversion; call and put smile costs agree
        const OptionSide side = strike >= forward_price(snapshot_, tau_) ? OptionSide::Call : OptionSide::Put;
        double price = vanilla_price(side, snapshot_, strike, s0, tau_);
        for (std::size_t i = 0; i < 3; ++i) {
            price += w[i] * (vanilla_price(side, snapshot_, ks[i], pillars_[i].vol, tau_) -
                             vanilla_price(side, snapshot_, ks[i], s0, tau_));
        }
        if (price <= vanilla_price(side, snapshot_, strike, kVolFloor, tau_)) return kVolFloor;
        try {
            return implied_vol(side, price, snapshot_, strike, tau_);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string("smile interpolation failed: ") + e.what());
        }
    }

    [[nodiscard]] double quad_b() const noexcept { return b_; }
    [[nodiscard]] double quad_c() const noexcept { return c_; }

private:
    std::array<SmilePillar, 3> pillars_;
    MarketSnapshot snapshot_;
    Conventions conv_;
    double tau_;
    SmileRule rule_;
    double b_;
    double c_;
};

namespace detail {

/// Fixed point K <- strike_from_delta(target, sigma(K)) started from sigma_atm, damped by
/// one half once the iteration starts to oscillate.
template <class VolFn>
[[nodiscard]] double pillar_strike_fixed_point(double target, OptionSide side, double sigma_atm,
                                               const MarketSnapshot& m, double tau, const Conventions& conv,
                                               VolFn&& vol_of) {
    double k = strike_from_delta(target, side, sigma_atm, m, tau, conv);
    double prev_step = 0.0;
    bool damp = false;
    for (int it = 0; it < 100; ++it) {
        double next = strike_from_delta(target, side, vol_of(k), m, tau, conv);
        const double step = next - k;
        if (it > 0 && step * prev_step < 0.0) damp = true;
        if (damp) next = k + 0.5 * step;
        if (std::abs(next - k) <= 1e-13 * k) return next;
        prev_step = step;
        k = next;
    }
    throw ConstructionError("smile: 25-delta strike fixed point did not converge in 100 iterations");
}

}  // namespace detail

/// Three-pillar smile from ATM / 25d RR / 25d 2-vol BF quotes. The wing pillars sit at the
/// strikes whose delta, evaluated at their own smile vol, is +/-0.25.
[[nodiscard]] inline SmileCurve build_smile(const TenorQuote& q, const MarketSnapshot& m, const Conventions& conv) {
    q.validate();
    if (q.bf_kind != BfKind::TwoVol) {
        throw ValidationError("build_smile: needs a 2-vol butterfly; convert with bf2vol_from_bf1vol");
    }
    const double vc = q.call_wing_vol();
    const double vp = q.put_wing_vol();
    // the wing vols are quoted at the pillar strikes themselves, so sigma(K) is constant there
    const double kc = detail::pillar_strike_fixed_point(0.25, OptionSide::Call, q.sigma_atm, m, q.tau, conv,
                                                        [vc](double) { return vc; });
    const double kp = detail::pillar_strike_fixed_point(-0.25, OptionSide::Put, q.sigma_atm, m, q.tau, conv,
                                                        [vp](double) { return vp; });
    const double katm = atm_strike(forward_price(m, q.tau), q.sigma_atm, q.tau, conv);
    return SmileCurve({SmilePillar{kp, vp}, SmilePillar{katm, q.sigma_atm}, SmilePillar{kc, vc}}, m, conv, q.tau);
}

/// Quadratic smile in Y = ln(K / K_atm); its 25d pillars solve delta(K, sigma(K)) = +/-0.25.
[[nodiscard]] inline SmileCurve build_quadratic_smile(double sigma_atm, double b, double c, double tau,
                                                      const MarketSnapshot& m, const Conventions& conv) {
    const double katm = atm_strike(forward_price(m, tau), sigma_atm, tau, conv);
    auto vol = [&](double k) {
        const double y = std::log(k / katm);
        return std::max(sigma_atm + b * y + c * y * y, kVolFloor);
    };
    const double kc = detail::pillar_strike_fixed_point(0.25, OptionSide::Call, sigma_atm, m, tau, conv, vol);
    const double kp = detail::pillar_strike_fixed_point(-0.25, OptionSide::Put, sigma_atm, m, tau, conv, vol);
    return SmileCurve({SmilePillar{kp, vol(kp)}, SmilePillar{katm, sigma_atm}, SmilePillar{kc, vol(kc)}}, m, conv,
                      tau, SmileRule::Quadratic, b, c);
}

struct BrokerStrangle {
    double sigma_bf25_1vol;
    double k_put;   // K*_25P, solved at the single strangle vol
    double k_call;  // K*_25C
};

namespace detail {

struct BrokerStrangleGap {
    double gap;
    double k_put;
    double k_call;
};

[[nodiscard]] inline BrokerStrangleGap broker_strangle_gap(const SmileCurve& curve, double bf1) {
    const auto& m = curve.snapshot();
    const double tau = curve.tau();
    const double s = curve.sigma_atm() + bf1;
    if (!(s > 0.0)) throw NoSolutionError("broker strangle: non-positive strangle vol");
    const double kc = strike_from_delta(0.25, OptionSide::Call, s, m, tau, curve.conventions());
    const double kp = strike_from_delta(-0.25, OptionSide::Put, s, m, tau, curve.conventions());
    const double single = vanilla_price(OptionSide::Call, m, kc, s, tau) + vanilla_price(OptionSide::Put, m, kp, s, tau);
    const double smile = vanilla_price(OptionSide::Call, m, kc, curve.vol_at_strike(kc), tau) +
                         vanilla_price(OptionSide::Put, m, kp, curve.vol_at_strike(kp), tau);
    return {single - smile, kp, kc};
}

}  // namespace detail

/// Broker (1-vol) strangle butterfly implied by a smile curve: the single vol at which a
/// strangle struck at its own 25d strikes costs the same as on the curve. Secant iteration,
/// converged when the price gap falls below 1e-10 * spot.
[[nodiscard]] inline BrokerStrangle bf1vol_from_curve(const SmileCurve& curve) {
    const double tol = 1e-10 * curve.snapshot().spot;
    double x0 = curve.sigma_bf25_2vol();
    auto g0 = detail::broker_strangle_gap(curve, x0);
    if (std::abs(g0.gap) <= tol) return {x0, g0.k_put, g0.k_call};
    double x1 = x0 + 1e-3;
    auto g1 = detail::broker_strangle_gap(curve, x1);
    const double max_step = 0.25 * curve.sigma_atm();
    for (int it = 0; it < 100; ++it) {
        if (std::abs(g1.gap) <= tol) return {x1, g1.k_put, g1.k_call};
        const double slope = (g1.gap - g0.gap) / (x1 - x0);
        if (!(std::abs(slope) > 0.0) || !std::isfinite(slope)) break;
        double step = -g1.gap / slope;
        step = std::clamp(step, -max_step, max_step);
        double x2 = x1 + step;
        while (!(curve.sigma_atm() + x2 > kVolFloor)) x2 = 0.5 * (x1 + x2);
        x0 = x1;
        g0 = g1;
        x1 = x2;
        g1 = detail::broker_strangle_gap(curve, x1);
    }
    throw ConstructionError("bf1vol_from_curve: broker strangle equality not met after 100 iterations");
}

/// Converts a 1-vol butterfly quote into the 2-vol quote whose smile reproduces it.
[[nodiscard]] inline TenorQuote bf2vol_from_bf1vol(const TenorQuote& q, const MarketSnapshot& m,
                                                   const Conventions& conv) {
    if (q.bf_kind != BfKind::OneVol) throw ValidationError("bf2vol_from_bf1vol: quote must be 1-vol");
    const double target = q.sigma_bf25;
    auto quote_for = [&](double bf2) {
        TenorQuote t = q;
        t.bf_kind = BfKind::TwoVol;
        t.sigma_bf25 = bf2;
        return t;
    };
    auto h = [&](double bf2) {
        return bf1vol_from_curve(build_smile(quote_for(bf2), m, conv)).sigma_bf25_1vol - target;
    };
    // lowest 2-vol BF keeping both wings above the vol floor
    const double bf_min = -q.sigma_atm + 0.5 * std::abs(q.sigma_rr25) + 0.01 * q.sigma_atm;
    double lo = std::max(target - 0.005, bf_min);
    double hi = target + 0.005;
    double hlo = h(lo);
    double hhi = h(hi);
    for (int it = 0; it < 40 && std::signbit(hlo) == std::signbit(hhi); ++it) {
        const double width = hi - lo;
        if (hlo > 0.0) {
            lo = std::max(lo - width, bf_min);
            hlo = h(lo);
        } else {
            hi += width;
            hhi = h(hi);
        }
        if (hi - target > 0.5) break;
    }
    if (std::signbit(hlo) == std::signbit(hhi)) {
        std::ostringstream os;
        os << "bf2vol_from_bf1vol: could not bracket the 2-vol butterfly on [" << lo << ", " << hi << "]";
        throw NoSolutionError(os.str());
    }
    const double bf2 = num::find_root(h, lo, hi, 1e-12);
    return quote_for(bf2);
}

/// Vega-weighted average of the wing vols, vegas taken at sigma_atm at the pillar strikes.
[[nodiscard]] inline double vega_weighted_strangle(const SmileCurve& curve) {
    const auto& p = curve.pillars();
    const double vp = vanilla_vega(curve.snapshot(), p[0].strike, curve.sigma_atm(), curve.tau());
    const double vc = vanilla_vega(curve.snapshot(), p[2].strike, curve.sigma_atm(), curve.tau());
    return (p[0].vol * vp + p[2].vol * vc) / (vp + vc);
}

}  // namespace vvfx
