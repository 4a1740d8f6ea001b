#include <gtest/gtest.h>

#include "vvfx/arbitrage_guard.hpp"
#include "vvfx/vanna_volga.hpp"

using namespace vvfx;

namespace {

OptionSpec make(OptionKind kind, std::optional<double> K, std::optional<double> L, std::optional<double> H) {
    OptionSpec s;
    s.kind = kind;
    s.strike = K;
    s.lower_barrier = L;
    s.upper_barrier = H;
    return s;
}

}  // namespace

TEST(Clamp, NoRefsOnlyFloors) {
    EXPECT_EQ(clamp(0.3).clamped, 0.3);
    EXPECT_TRUE(clamp(0.3).applied_rules.empty());
    const auto r = clamp(-0.01);
    EXPECT_EQ(r.clamped, 0.0);
    EXPECT_EQ(r.original, -0.01);
    ASSERT_EQ(r.applied_rules.size(), 1u);
    EXPECT_EQ(r.applied_rules[0], ClampRule::FloorZero);
}

TEST(Clamp, AppliesRulesInOrder) {
    const auto r = clamp(0.5, {0.4, 0.3, 0.2});
    EXPECT_EQ(r.clamped, 0.2);
    const std::vector<ClampRule> want{ClampRule::KoLeVanilla, ClampRule::DkoLeKo1, ClampRule::DkoLeKo2};
    EXPECT_EQ(r.applied_rules, want);
}

TEST(Clamp, SkipsRulesAlreadySatisfied) {
    const auto r = clamp(0.25, {0.4, 0.3, 0.2});
    ASSERT_EQ(r.applied_rules.size(), 1u);
    EXPECT_EQ(r.applied_rules[0], ClampRule::DkoLeKo2);
}

TEST(Clamp, NegativeReferenceIsFlooredFirst) {
    const auto r = clamp(0.1, {-0.2, std::nullopt, std::nullopt});
    EXPECT_EQ(r.clamped, 0.0);
    EXPECT_GE(r.clamped, 0.0);
}

TEST(Clamp, Idempotent) {
    const ClampRefs refs{0.4, 0.35, 0.5};
    for (double p : {-1.0, 0.0, 0.2, 0.37, 0.45, 2.0}) {
        const double once = clamp(p, refs).clamped;
        const auto twice = clamp(once, refs);
        EXPECT_EQ(twice.clamped, once);
        EXPECT_TRUE(twice.applied_rules.empty());
    }
}

TEST(ClampWindow, BoundedByKnockOutAndVanilla) {
    EXPECT_EQ(clamp_window(0.5, 0.4, 0.1).clamped, 0.4);
    EXPECT_EQ(clamp_window(0.05, 0.4, 0.1).clamped, 0.1);
    const auto inside = clamp_window(0.2, 0.4, 0.1);
    EXPECT_EQ(inside.clamped, 0.2);
    EXPECT_TRUE(inside.applied_rules.empty());
}

TEST(Decompose, KnockInLegs) {
    const auto legs = decompose(make(OptionKind::DownInPut, 1.0, 0.9, {}));
    ASSERT_EQ(legs.size(), 2u);
    EXPECT_EQ(legs[0].spec.kind, OptionKind::VanillaPut);
    EXPECT_FALSE(legs[0].spec.lower_barrier);
    EXPECT_EQ(legs[1].sign, -1.0);
    EXPECT_EQ(legs[1].spec.kind, OptionKind::DownOutPut);
}

TEST(Decompose, TouchLegsUseCash) {
    const auto ot = decompose(make(OptionKind::OneTouch, {}, {}, 1.2));
    ASSERT_EQ(ot.size(), 2u);
    EXPECT_TRUE(ot[0].cash);
    EXPECT_EQ(ot[1].spec.kind, OptionKind::NoTouch);
    const auto dot = decompose(make(OptionKind::DoubleOneTouch, {}, 0.9, 1.2));
    EXPECT_EQ(dot[1].spec.kind, OptionKind::DoubleNoTouch);
}

TEST(Decompose, KikoIsKnockOutMinusDoubleKnockOut) {
    auto s = make(OptionKind::KIKOCall, 1.0, 0.9, 1.2);
    s.knock_in_barrier = BarrierSide::Upper;
    const auto legs = decompose(s);
    ASSERT_EQ(legs.size(), 2u);
    // knocks in at the upper barrier, so the surviving single knock-out sits on the lower one
    EXPECT_EQ(legs[0].spec.kind, OptionKind::DownOutCall);
    EXPECT_TRUE(legs[0].spec.lower_barrier);
    EXPECT_FALSE(legs[0].spec.upper_barrier);
    EXPECT_EQ(legs[1].spec.kind, OptionKind::DKOCall);
}

TEST(Decompose, SingleLegsForBaseKinds) {
    for (OptionKind k : {OptionKind::VanillaCall, OptionKind::UpOutPut, OptionKind::DKOCall, OptionKind::NoTouch,
                         OptionKind::DoubleNoTouch}) {
        EXPECT_EQ(decompose(make(k, {}, {}, {})).size(), 1u);
    }
}

TEST(Helpers, SingleKnockOutAndNoTouch) {
    const auto dko = make(OptionKind::DKOPut, 1.0, 0.9, 1.2);
    const auto lo = single_knock_out(dko, BarrierSide::Lower);
    EXPECT_EQ(lo.kind, OptionKind::DownOutPut);
    EXPECT_EQ(lo.lower_barrier, 0.9);
    EXPECT_FALSE(lo.upper_barrier);
    const auto hi = single_no_touch(dko, BarrierSide::Upper);
    EXPECT_EQ(hi.kind, OptionKind::NoTouch);
    EXPECT_EQ(hi.upper_barrier, 1.2);
    EXPECT_FALSE(hi.lower_barrier);
    EXPECT_THROW((void)knock_out_of(OptionKind::VanillaCall), DomainError);
}

TEST(PricerClamps, DoubleKnockOutRespectsSingleKnockOuts) {
    const MarketSnapshot m{{}, 1.0902, 0.013, 0.0203};
    const auto conv = Conventions::make(DeltaStyle::Spot, PremiumStyle::Included);
    const auto curve = build_smile({1.0, 0.1685, -0.013, 0.011, BfKind::TwoVol}, m, conv);
    const VannaVolgaPricer vv(curve, {VicinityVariant::Fet, 1.0, 0.0, 1.0, 0.9});
    auto s = make(OptionKind::DKOCall, 1.05, 0.98, 1.2);
    s.tau = 1.0;
    const auto r = vv.price(s);
    const auto ko1 = vv.price(single_knock_out(s, BarrierSide::Lower));
    const auto ko2 = vv.price(single_knock_out(s, BarrierSide::Upper));
    const auto van = vv.price(vanilla_of(s));
    EXPECT_GE(r.final_price, 0.0);
    EXPECT_LE(r.final_price, ko1.final_price + 1e-15);
    EXPECT_LE(r.final_price, ko2.final_price + 1e-15);
    EXPECT_LE(ko2.final_price, van.final_price + 1e-15);
}
