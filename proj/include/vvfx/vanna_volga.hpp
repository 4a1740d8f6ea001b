#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vvfx/arbitrage_guard.hpp"
#include "vvfx/black_scholes.hpp"
#include "vvfx/bs_engine.hpp"
#include "vvfx/errors.hpp"
#include "vvfx/exit_metrics.hpp"
#include "vvfx/market_conventions.hpp"
#include "vvfx/option_spec.hpp"
#include "vvfx/smile.hpp"
#include "vvfx/vv_weights.hpp"

namespace vvfx {

/// The three hedge instruments, all struck with sigma_atm:
///   ATM = half straddle at K_atm, RR = C(K_c) - P(K_p), BF = half strangle - half straddle.
struct HedgeSet {
    double sigma_atm = 0.0;
    double tau = 0.0;
    double k_put = 0.0;
    double k_atm = 0.0;
    double k_call = 0.0;
    std::array<GreeksTriple, 3> legs{};  // ATM, RR, BF at sigma_atm
    double atm_cost = 0.0;               // smile price minus sigma_atm price per leg
    double rr_cost = 0.0;
    double bf_cost = 0.0;
};

enum HedgeLeg : std::size_t { kLegAtm = 0, kLegRr = 1, kLegBf = 2 };

[[nodiscard]] inline HedgeSet build_hedge_set(const SmileCurve& curve) {
    const auto& m = curve.snapshot();
    const double tau = curve.tau();
    const double s0 = curve.sigma_atm();
    HedgeSet h;
    h.sigma_atm = s0;
    h.tau = tau;
    h.k_atm = curve.k_atm();
    h.k_call = strike_from_delta(0.25, OptionSide::Call, s0, m, tau, curve.conventions());
    h.k_put = strike_from_delta(-0.25, OptionSide::Put, s0, m, tau, curve.conventions());

    const GreeksTriple g_atm = vanilla_greeks(m, h.k_atm, s0, tau);
    const GreeksTriple g_c = vanilla_greeks(m, h.k_call, s0, tau);
    const GreeksTriple g_p = vanilla_greeks(m, h.k_put, s0, tau);
    h.legs[kLegAtm] = g_atm;
    h.legs[kLegRr] = g_c - g_p;
    h.legs[kLegBf] = 0.5 * (g_c + g_p) - g_atm;

    auto cost = [&](OptionSide side, double k) {
        return vanilla_price(side, m, k, curve.vol_at_strike(k), tau) - vanilla_price(side, m, k, s0, tau);
    };
    const double atm_straddle = cost(OptionSide::Call, h.k_atm) + cost(OptionSide::Put, h.k_atm);
    const double c_cost = cost(OptionSide::Call, h.k_call);
    const double p_cost = cost(OptionSide::Put, h.k_put);
    h.atm_cost = 0.5 * atm_straddle;
    h.rr_cost = c_cost - p_cost;
    h.bf_cost = 0.5 * (c_cost + p_cost) - 0.5 * atm_straddle;
    return h;
}

/// Market price attached to one unit of vega, vanna and volga.
struct GreekPrices {
    double vega = 0.0;
    double vanna = 0.0;
    double volga = 0.0;
};

inline constexpr double kMaxHedgeCondition = 1e12;

/// Solves A^T omega = (0, RR_cost, BF_cost), where column j of A holds the
/// (vega, vanna, volga) of hedge leg j.
[[nodiscard]] inline GreekPrices market_greek_prices(const HedgeSet& h) {
    Eigen::Matrix3d at;
    for (std::size_t j = 0; j < 3; ++j) {
        const auto r = static_cast<Eigen::Index>(j);
        at(r, 0) = h.legs[j].vega;
        at(r, 1) = h.legs[j].vanna;
        at(r, 2) = h.legs[j].volga;
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(at)).singularValues();
    if (!(sv(2) > 0.0) || sv(0) / sv(2) > kMaxHedgeCondition) {
        throw NumericalError("market_greek_prices: hedge greek matrix is near-singular");
    }
    const Eigen::Vector3d omega = at.partialPivLu().solve(Eigen::Vector3d(0.0, h.rr_cost, h.bf_cost));
    return {omega(0), omega(1), omega(2)};
}

/// Central-difference bumps for exotic Greeks.
inline constexpr double kVolBump = 1e-4;
inline constexpr double kSpotBumpRel = 1e-4;

/// Vega, vanna and volga at `sigma`: analytic for vanillas, bumped closed-form prices otherwise.
[[nodiscard]] inline GreeksTriple instrument_greeks(const OptionSpec& s, double sigma, const MarketSnapshot& m) {
    if (is_vanilla(s.kind)) return vanilla_greeks(m, s.K(), sigma, s.tau);
    const double hv = kVolBump;
    const double hs = kSpotBumpRel * m.spot;
    auto px = [&](double spot, double vol) { return bs_price(s, vol, m.with_spot(spot)).value; };
    const double p0 = px(m.spot, sigma);
    const double pu = px(m.spot, sigma + hv);
    const double pd = px(m.spot, sigma - hv);
    const double vanna = (px(m.spot + hs, sigma + hv) - px(m.spot + hs, sigma - hv) - px(m.spot - hs, sigma + hv) +
                          px(m.spot - hs, sigma - hv)) /
                         (4.0 * hs * hv);
    return {(pu - pd) / (2.0 * hv), vanna, (pu - 2.0 * p0 + pd) / (hv * hv)};
}

/// Rule-of-thumb price X^BS + Vanna(X)/Vanna(RR) RR_cost + Volga(X)/Volga(BF) BF_cost.
[[nodiscard]] inline double simple_vv_price(const OptionSpec& s, const SmileCurve& curve, const HedgeSet& h) {
    const auto& m = curve.snapshot();
    const double s0 = curve.sigma_atm();
    const double scale = h.legs[kLegAtm].vega;
    if (!(std::abs(h.legs[kLegRr].vanna) * m.spot > 1e-12 * scale) ||
        !(std::abs(h.legs[kLegBf].volga) > 1e-12 * scale)) {
        throw NumericalError("simple_vv_price: vanishing Vanna(RR) or Volga(BF)");
    }
    const GreeksTriple g = instrument_greeks(s, s0, m);
    return bs_price(s, s0, m).value + g.vanna / h.legs[kLegRr].vanna * h.rr_cost +
           g.volga / h.legs[kLegBf].volga * h.bf_cost;
}

/// X^BS + X_vega om_vega + X_vanna om_vanna + X_volga om_volga. For a vanilla this reproduces
/// the smile price exactly, whatever the hedge strikes.
[[nodiscard]] inline double full_vv_price(const OptionSpec& s, const SmileCurve& curve, const HedgeSet& h) {
    const auto om = market_greek_prices(h);
    const GreeksTriple g = instrument_greeks(s, curve.sigma_atm(), curve.snapshot());
    return bs_price(s, curve.sigma_atm(), curve.snapshot()).value + g.vega * om.vega + g.vanna * om.vanna +
           g.volga * om.volga;
}

struct VVParams {
    VicinityVariant variant = VicinityVariant::Fet;
    double a = 0.5;
    double b = 0.0;
    double c = 0.5;
    double gamma_star = 0.9;

    void validate() const {
        if (!(gamma_star > 0.0 && gamma_star < 1.0)) throw ValidationError("params: gamma_star must lie in (0,1)");
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
            throw ValidationError("params: non-finite coefficient");
        }
    }
};

struct Attenuation {
    double vanna = 1.0;
    double volga = 1.0;
};

/// p_vanna = a g, p_volga = b + c g, blended linearly to 1 above gamma_star. Strikeless
/// products keep the unblended form: far from the barriers their Greeks vanish anyway.
[[nodiscard]] inline Attenuation attenuation(const VVParams& p, double gamma, bool strikeless) {
    detail::require(gamma >= 0.0 && gamma <= 1.0, "attenuation: gamma outside [0,1]");
    const double gs = p.gamma_star;
    if (strikeless || gamma <= gs) return {p.a * gamma, p.b + p.c * gamma};
    const double t = (gamma - gs) / (1.0 - gs);
    return {p.a * gs * (1.0 - t) + t, (p.b + p.c * gs) * (1.0 - t) + t};
}

struct PricingFlags {
    bool knocked = false;
    bool clamped_floor = false;
    bool clamped_vanilla = false;
    bool clamped_single_ko = false;
    bool series_warning = false;
    bool vicinity_warning = false;
};

/// Prices are per unit notional. The correction terms are unattenuated X_greek * omega_greek
/// sums over the replication legs; unclamped_price already carries the attenuation.
struct PricingResult {
    double bstv = 0.0;
    double vega_term = 0.0;
    double vanna_term = 0.0;
    double volga_term = 0.0;
    double p_vanna = 1.0;
    double p_volga = 1.0;
    double gamma = 1.0;
    double unclamped_price = 0.0;
    double final_price = 0.0;
    PricingFlags flags;
    std::vector<ClampRule> applied_rules;
};

/// Vanna-volga pricer bound to one smile. Hedge set and greek prices are computed once.
class VannaVolgaPricer {
public:
    VannaVolgaPricer(const SmileCurve& curve, VVParams params, PdeGrid grid = {})
        : curve_(curve), params_(params), grid_(grid), hedges_(build_hedge_set(curve)),
          omega_(market_greek_prices(hedges_)) {
        params_.validate();
        grid_.validate();
    }

    [[nodiscard]] const HedgeSet& hedges() const noexcept { return hedges_; }
    [[nodiscard]] const GreekPrices& greek_prices() const noexcept { return omega_; }
    [[nodiscard]] const VVParams& params() const noexcept { return params_; }
    [[nodiscard]] const SmileCurve& curve() const noexcept { return curve_; }

    [[nodiscard]] VicinityMeasure vicinity_of(const Barriers& b, double tau) const {
        if (b.empty()) return {};
        return vicinity(params_.variant, b, curve_.sigma_atm(), curve_.snapshot(), tau, grid_);
    }

    /// Price with the instrument's vicinity measure supplied by the caller.
    [[nodiscard]] PricingResult price(const OptionSpec& s, double gamma) const {
        check_tenor(s);
        detail::require(gamma >= -1e-12 && gamma <= 1.0 + 1e-12, "vv_price: gamma outside [0,1]");
        gamma = std::clamp(gamma, 0.0, 1.0);
        const auto& m = curve_.snapshot();
        const double s0 = curve_.sigma_atm();
        const BsPrice bs = bs_price(s, s0, m);

        PricingResult r;
        r.bstv = bs.value;
        r.gamma = gamma;
        r.flags.knocked = bs.knocked;
        r.flags.series_warning = bs.series_warning;
        const Attenuation att = attenuation(params_, gamma, is_treasury(s.kind));
        r.p_vanna = att.vanna;
        r.p_volga = att.volga;

        Cache cache{gamma, barriers_of(s), {}};
        double corrections = 0.0;
        double final_price = 0.0;
        for (const auto& leg : decompose(s)) {
            if (leg.cash) {
                final_price += leg.sign * m.df_d(s.tau);
                continue;
            }
            const Leg l = leg_price(leg.spec, cache);
            r.vega_term += leg.sign * l.vega_term;
            r.vanna_term += leg.sign * l.vanna_term;
            r.volga_term += leg.sign * l.volga_term;
            corrections += leg.sign * (l.raw - l.bs);
            r.flags.series_warning = r.flags.series_warning || l.series_warning;
            r.flags.vicinity_warning = r.flags.vicinity_warning || l.vicinity_warning;
            const ClampReport cr = clamp_leg(leg.spec, l, cache);
            for (ClampRule rule : cr.applied_rules) {
                r.applied_rules.push_back(rule);
                r.flags.clamped_floor = r.flags.clamped_floor || rule == ClampRule::FloorZero;
                r.flags.clamped_vanilla = r.flags.clamped_vanilla || rule == ClampRule::KoLeVanilla;
                r.flags.clamped_single_ko = r.flags.clamped_single_ko || rule == ClampRule::DkoLeKo1 ||
                                            rule == ClampRule::DkoLeKo2;
            }
            final_price += leg.sign * cr.clamped;
        }
        r.unclamped_price = r.bstv + corrections;
        r.final_price = std::max(final_price, 0.0);
        return r;
    }

    /// Price with the vicinity measure computed from the configured variant.
    [[nodiscard]] PricingResult price(const OptionSpec& s) const {
        check_tenor(s);
        const VicinityMeasure v = vicinity_of(barriers_of(s), s.tau);
        PricingResult r = price(s, v.gamma);
        r.flags.vicinity_warning = r.flags.vicinity_warning || v.warning;
        return r;
    }

private:
    struct Leg {
        OptionSpec spec;
        double bs = 0.0;
        double vega_term = 0.0;
        double vanna_term = 0.0;
        double volga_term = 0.0;
        double raw = 0.0;      // attenuated, unclamped
        double clamped = 0.0;  // set once the leg has been clamped
        bool is_clamped = false;
        bool series_warning = false;
        bool vicinity_warning = false;
    };

    // Legs priced while valuing one instrument; the reference legs of the clamp rules are
    // shared between constituents.
    struct Cache {
        double gamma;
        Barriers barriers;
        std::deque<Leg> legs;  // stable references across push_back
    };

    static bool same_spec(const OptionSpec& a, const OptionSpec& b) {
        return a.kind == b.kind && a.strike == b.strike && a.lower_barrier == b.lower_barrier &&
               a.upper_barrier == b.upper_barrier && a.tau == b.tau;
    }

    void check_tenor(const OptionSpec& s) const {
        if (std::abs(s.tau - curve_.tau()) > 1e-9 * std::max(1.0, s.tau)) {
            throw ValidationError("vv_price: instrument tau differs from the smile tenor");
        }
    }

    Leg& leg_price(const OptionSpec& s, Cache& cache) const {
        for (auto& l : cache.legs) {
            if (same_spec(l.spec, s)) return l;
        }
        const auto& m = curve_.snapshot();
        const double s0 = curve_.sigma_atm();
        Leg l;
        l.spec = s;
        const BsPrice bs = bs_price(s, s0, m);
        l.bs = bs.value;
        l.series_warning = bs.series_warning;
        double gamma = 1.0;
        const Barriers b = barriers_of(s);
        if (!b.empty()) {
            if (b == cache.barriers) {
                gamma = cache.gamma;
            } else {
                const VicinityMeasure v = vicinity_of(b, s.tau);
                gamma = v.gamma;
                l.vicinity_warning = v.warning;
            }
        }
        const GreeksTriple g = instrument_greeks(s, s0, m);
        l.vega_term = g.vega * omega_.vega;
        l.vanna_term = g.vanna * omega_.vanna;
        l.volga_term = g.volga * omega_.volga;
        const Attenuation att = attenuation(params_, gamma, is_treasury(s.kind));
        l.raw = l.bs + att.vanna * l.vanna_term + att.volga * l.volga_term;
        cache.legs.push_back(l);
        return cache.legs.back();
    }

    double clamped_leg(const OptionSpec& s, Cache& cache) const {
        const Leg l = leg_price(s, cache);
        if (l.is_clamped) return l.clamped;
        const double c = clamp_leg(s, l, cache).clamped;
        Leg& stored = leg_price(s, cache);
        stored.clamped = c;
        stored.is_clamped = true;
        return c;
    }

    ClampReport clamp_leg(const OptionSpec& s, const Leg& l, Cache& cache) const {
        ClampRefs refs;
        const double dfd = curve_.snapshot().df_d(s.tau);
        switch (s.kind) {
            case OptionKind::VanillaCall:
            case OptionKind::VanillaPut:
                break;
            case OptionKind::UpOutCall:
            case OptionKind::DownOutCall:
            case OptionKind::UpOutPut:
            case OptionKind::DownOutPut:
                refs.vanilla = clamped_leg(vanilla_of(s), cache);
                break;
            case OptionKind::DKOCall:
            case OptionKind::DKOPut:
                refs.vanilla = clamped_leg(vanilla_of(s), cache);
                refs.ko1 = clamped_leg(single_knock_out(s, BarrierSide::Lower), cache);
                refs.ko2 = clamped_leg(single_knock_out(s, BarrierSide::Upper), cache);
                break;
            case OptionKind::NoTouch:
                refs.vanilla = dfd;
                break;
            case OptionKind::DoubleNoTouch:
                refs.vanilla = dfd;
                refs.ko1 = clamped_leg(single_no_touch(s, BarrierSide::Lower), cache);
                refs.ko2 = clamped_leg(single_no_touch(s, BarrierSide::Upper), cache);
                break;
            default:
                throw DomainError("clamp: composite kind reached the leg clamp");
        }
        return clamp(l.raw, refs);
    }

    SmileCurve curve_;
    VVParams params_;
    PdeGrid grid_;
    HedgeSet hedges_;
    GreekPrices omega_;
};

/// Attenuated vanna-volga price for a given vicinity measure.
[[nodiscard]] inline PricingResult vv_price(const OptionSpec& s, const SmileCurve& curve, const VVParams& params,
                                            double gamma) {
    return VannaVolgaPricer(curve, params).price(s, gamma);
}

/// Attenuated vanna-volga price with gamma computed from params.variant.
[[nodiscard]] inline PricingResult price_instrument(const OptionSpec& s, const SmileCurve& curve,
                                                    const VVParams& params, const PdeGrid& grid = {}) {
    return VannaVolgaPricer(curve, params, grid).price(s);
}

}  // namespace vvfx
