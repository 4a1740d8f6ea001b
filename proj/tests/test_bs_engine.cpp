#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vvfx/bs_engine.hpp"

using namespace vvfx;

namespace {

const MarketSnapshot kFlat{{}, 1.3, 0.05, 0.03};

OptionSpec make(OptionKind kind, std::optional<double> K, std::optional<double> L, std::optional<double> H,
                double tau = 1.3) {
    OptionSpec s;
    s.kind = kind;
    s.strike = K;
    s.lower_barrier = L;
    s.upper_barrier = H;
    s.tau = tau;
    return s;
}

double price(const OptionSpec& s, double sigma = 0.2, const MarketSnapshot& m = kFlat) {
    return bs_price(s, sigma, m).value;
}

// market where ln S has zero drift: r_d - r_f = sigma^2 / 2
MarketSnapshot driftless_log(double sigma) { return {{}, 1.3, 0.03 + 0.5 * sigma * sigma, 0.03}; }

}  // namespace

TEST(Vanilla, PutCallParity) {
    for (double K : {1.0, 1.3, 1.7}) {
        const double c = price(make(OptionKind::VanillaCall, K, {}, {}));
        const double p = price(make(OptionKind::VanillaPut, K, {}, {}));
        EXPECT_NEAR(c - p, kFlat.spot * kFlat.df_f(1.3) - K * kFlat.df_d(1.3), 1e-14);
    }
}

TEST(Vanilla, ImpliedVolRoundTrip) {
    for (double s : {0.05, 0.2, 0.6}) {
        const double c = vanilla_price(OptionSide::Call, kFlat, 1.4, s, 1.3);
        EXPECT_NEAR(implied_vol(OptionSide::Call, c, kFlat, 1.4, 1.3), s, 1e-10);
    }
}

TEST(Vanilla, GreeksMatchFiniteDifferences) {
    const double K = 1.35, s = 0.2, tau = 1.3, h = 1e-4;
    const auto g = vanilla_greeks(kFlat, K, s, tau);
    auto v = [&](double spot, double vol) { return vanilla_price(OptionSide::Call, kFlat.with_spot(spot), K, vol, tau); };
    EXPECT_NEAR(g.vega, (v(1.3, s + h) - v(1.3, s - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(g.volga, (v(1.3, s + h) - 2 * v(1.3, s) + v(1.3, s - h)) / (h * h), 1e-4);
    const double hs = 1e-4;
    EXPECT_NEAR(g.vanna,
                (v(1.3 + hs, s + h) - v(1.3 + hs, s - h) - v(1.3 - hs, s + h) + v(1.3 - hs, s - h)) / (4 * h * hs),
                1e-4);
}

TEST(Vanilla, ZeroVolIsDiscountedForwardIntrinsic) {
    const double fwd = forward_price(kFlat, 1.3);
    EXPECT_NEAR(price(make(OptionKind::VanillaCall, 1.2, {}, {}), 0.0), kFlat.df_d(1.3) * (fwd - 1.2), 1e-14);
    EXPECT_EQ(price(make(OptionKind::VanillaPut, 1.2, {}, {}), 0.0), 0.0);
}

TEST(SingleBarrier, InPlusOutIsVanilla) {
    const std::pair<OptionKind, OptionKind> pairs[] = {
        {OptionKind::UpOutCall, OptionKind::UpInCall},
        {OptionKind::UpOutPut, OptionKind::UpInPut},
        {OptionKind::DownOutCall, OptionKind::DownInCall},
        {OptionKind::DownOutPut, OptionKind::DownInPut},
    };
    for (const auto& [ko, ki] : pairs) {
        const bool up = needs_upper(ko);
        for (double K : {1.1, 1.3, 1.5}) {
            for (double B : up ? std::vector{1.35, 1.6} : std::vector{1.0, 1.25}) {
                auto out = make(ko, K, up ? std::nullopt : std::optional(B), up ? std::optional(B) : std::nullopt);
                auto in = out;
                in.kind = ki;
                const double van = vanilla_price(payoff_side(ko), kFlat, K, 0.2, 1.3);
                EXPECT_NEAR(price(out) + price(in), van, 1e-12) << to_string(ko) << " K=" << K << " B=" << B;
            }
        }
    }
}

TEST(SingleBarrier, FarBarrierIsVanilla) {
    const double van = vanilla_price(OptionSide::Call, kFlat, 1.3, 0.2, 1.3);
    EXPECT_NEAR(price(make(OptionKind::UpOutCall, 1.3, {}, 20.0)), van, 1e-12);
    EXPECT_NEAR(price(make(OptionKind::DownOutCall, 1.3, 0.05, {})), van, 1e-12);
}

TEST(SingleBarrier, BreachedAtValuation) {
    const auto ko = bs_price(make(OptionKind::UpOutCall, 1.2, {}, 1.25), 0.2, kFlat);
    EXPECT_TRUE(ko.knocked);
    EXPECT_EQ(ko.value, 0.0);
    const auto ki = bs_price(make(OptionKind::UpInCall, 1.2, {}, 1.25), 0.2, kFlat);
    EXPECT_TRUE(ki.knocked);
    EXPECT_NEAR(ki.value, vanilla_price(OptionSide::Call, kFlat, 1.2, 0.2, 1.3), 1e-15);
}

TEST(SingleBarrier, ReverseKnockOutBelowVanilla) {
    const double rko = price(make(OptionKind::UpOutCall, 1.3, {}, 1.5));
    EXPECT_GT(rko, 0.0);
    EXPECT_LT(rko, vanilla_price(OptionSide::Call, kFlat, 1.3, 0.2, 1.3));
    // strike above the up barrier can never pay
    EXPECT_EQ(price(make(OptionKind::UpOutCall, 1.6, {}, 1.5)), 0.0);
}

TEST(Touch, ReflectionPrincipleWithZeroLogDrift) {
    const double s = 0.2, tau = 1.3;
    const auto m = driftless_log(s);
    const double sd = s * std::sqrt(tau);
    for (double H : {1.35, 1.5, 1.8}) {
        const double h = std::log(H / m.spot);
        EXPECT_NEAR(price(make(OptionKind::OneTouch, {}, {}, H), s, m), m.df_d(tau) * 2.0 * num::norm_cdf(-h / sd),
                    1e-14);
    }
    for (double L : {0.9, 1.1, 1.25}) {
        const double h = -std::log(L / m.spot);
        EXPECT_NEAR(price(make(OptionKind::OneTouch, {}, L, {}), s, m), m.df_d(tau) * 2.0 * num::norm_cdf(-h / sd),
                    1e-14);
    }
}

TEST(Touch, OneTouchPlusNoTouchIsDiscountFactor) {
    for (double H : {1.31, 1.5, 3.0}) {
        EXPECT_NEAR(price(make(OptionKind::OneTouch, {}, {}, H)) + price(make(OptionKind::NoTouch, {}, {}, H)),
                    kFlat.df_d(1.3), 1e-14);
    }
}

TEST(Touch, BreachedOneTouchPaysDiscountFactor) {
    const auto r = bs_price(make(OptionKind::OneTouch, {}, 1.35, {}), 0.2, kFlat);
    EXPECT_TRUE(r.knocked);
    EXPECT_NEAR(r.value, kFlat.df_d(1.3), 1e-15);
}

TEST(DoubleNoTouch, MatchesEigenfunctionSeriesWithZeroLogDrift) {
    // heat-kernel sine expansion, independent of the image series used by the engine
    const double s = 0.2, tau = 1.3;
    const auto m = driftless_log(s);
    const double a = std::log(1.1), b = std::log(1.6), x = std::log(m.spot), w = b - a;
    double p = 0.0;
    for (int n = 1; n < 400; n += 2) {
        const double k = n * std::numbers::pi / w;
        p += 4.0 / (n * std::numbers::pi) * std::sin(k * (x - a)) * std::exp(-0.5 * k * k * s * s * tau);
    }
    const auto r = bs_price(make(OptionKind::DoubleNoTouch, {}, 1.1, 1.6), s, m);
    EXPECT_NEAR(r.value, m.df_d(tau) * p, 1e-12);
    EXPECT_FALSE(r.series_warning);
    EXPECT_LE(r.series_terms, kMaxSeriesTerms);
}

TEST(DoubleNoTouch, BoundedBySingleNoTouches) {
    const double L = 1.15, H = 1.5;
    const double dnt = price(make(OptionKind::DoubleNoTouch, {}, L, H));
    const double ntl = price(make(OptionKind::NoTouch, {}, L, {}));
    const double nth = price(make(OptionKind::NoTouch, {}, {}, H));
    EXPECT_LE(dnt, std::min(ntl, nth));
    EXPECT_GE(dnt, ntl + nth - kFlat.df_d(1.3) - 1e-15);
    EXPECT_NEAR(dnt + price(make(OptionKind::DoubleOneTouch, {}, L, H)), kFlat.df_d(1.3), 1e-14);
}

TEST(DoubleNoTouch, WideBarriersApproachDiscountFactor) {
    EXPECT_NEAR(price(make(OptionKind::DoubleNoTouch, {}, 0.1, 20.0)), kFlat.df_d(1.3), 1e-12);
}

TEST(DoubleKnockOut, WideBarriersApproachVanilla) {
    EXPECT_NEAR(price(make(OptionKind::DKOCall, 1.3, 0.1, 20.0)), vanilla_price(OptionSide::Call, kFlat, 1.3, 0.2, 1.3),
                1e-12);
    EXPECT_NEAR(price(make(OptionKind::DKOPut, 1.3, 0.1, 20.0)), vanilla_price(OptionSide::Put, kFlat, 1.3, 0.2, 1.3),
                1e-12);
}

TEST(DoubleKnockOut, BelowEitherSingleKnockOut) {
    const double dko = price(make(OptionKind::DKOCall, 1.3, 1.1, 1.6));
    EXPECT_GT(dko, 0.0);
    EXPECT_LE(dko, price(make(OptionKind::UpOutCall, 1.3, {}, 1.6)));
    EXPECT_LE(dko, price(make(OptionKind::DownOutCall, 1.3, 1.1, {})));
}

TEST(DoubleKnockOut, InPlusOutIsVanilla) {
    for (OptionSide side : {OptionSide::Call, OptionSide::Put}) {
        const bool call = side == OptionSide::Call;
        const double ko = price(make(call ? OptionKind::DKOCall : OptionKind::DKOPut, 1.35, 1.1, 1.6));
        const double ki = price(make(call ? OptionKind::DKICall : OptionKind::DKIPut, 1.35, 1.1, 1.6));
        EXPECT_NEAR(ko + ki, vanilla_price(side, kFlat, 1.35, 0.2, 1.3), 1e-12);
    }
}

TEST(DoubleKnockOut, ShortDatedNarrowCorridorConverges) {
    const auto r = bs_price(make(OptionKind::DKOPut, 1.3, 1.28, 1.32, 0.02), 0.3, kFlat);
    EXPECT_FALSE(r.series_warning);
    EXPECT_GE(r.value, 0.0);
}

TEST(Kiko, KnockOutMinusDoubleKnockOut) {
    auto kiko = make(OptionKind::KIKOCall, 1.3, 1.15, 1.55);
    kiko.knock_in_barrier = BarrierSide::Lower;
    const double ko = price(make(OptionKind::UpOutCall, 1.3, {}, 1.55));
    const double dko = price(make(OptionKind::DKOCall, 1.3, 1.15, 1.55));
    EXPECT_NEAR(price(kiko), ko - dko, 1e-14);
    EXPECT_GT(price(kiko), 0.0);
}

TEST(Degenerate, ZeroVolFollowsForwardPath) {
    // forward drifts up from 1.3 to about 1.334: the 1.32 up barrier is hit
    EXPECT_EQ(price(make(OptionKind::UpOutCall, 1.2, {}, 1.32), 0.0), 0.0);
    EXPECT_NEAR(price(make(OptionKind::OneTouch, {}, {}, 1.32), 0.0), kFlat.df_d(1.3), 1e-15);
    EXPECT_NEAR(price(make(OptionKind::NoTouch, {}, 1.2, {}), 0.0), kFlat.df_d(1.3), 1e-15);
}

TEST(Engine, RejectsBadInputs) {
    EXPECT_THROW((void)bs_price(make(OptionKind::VanillaCall, 1.3, {}, {}), -0.1, kFlat), DomainError);
    EXPECT_THROW((void)bs_price(make(OptionKind::VanillaCall, 1.3, {}, {}, 0.0), 0.1, kFlat), DomainError);
}
