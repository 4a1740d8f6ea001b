#include <gtest/gtest.h>

#include <cmath>

#include "vvfx/bs_engine.hpp"
#include "vvfx/exit_metrics.hpp"
#include "vvfx/mc_oracle.hpp"

using namespace vvfx;

namespace {

const MarketSnapshot kFlat{{}, 1.3, 0.05, 0.03};

McConfig quick(std::uint64_t paths = 100'000, std::uint64_t seed = 11) {
    McConfig c;
    c.paths = paths;
    c.seed = seed;
    c.steps_per_year = 100;
    return c;
}

OptionSpec make(OptionKind kind, std::optional<double> K, std::optional<double> L, std::optional<double> H) {
    OptionSpec s;
    s.kind = kind;
    s.strike = K;
    s.lower_barrier = L;
    s.upper_barrier = H;
    s.tau = 1.3;
    return s;
}

}  // namespace

TEST(SplitMix, ReferenceOutput) {
    EXPECT_EQ(detail::splitmix64(0), 0xE220A8397B1DCDAFULL);
    detail::SplitMix64 g{0};
    EXPECT_EQ(g(), 0xE220A8397B1DCDAFULL);
    const double u = g.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
}

TEST(Bridge, HitProbability) {
    EXPECT_NEAR(detail::bridge_hit_probability(0.0, 0.0, 0.1, 0.01), std::exp(-2.0), 1e-15);
    EXPECT_EQ(detail::bridge_hit_probability(0.0, 0.0, 1.0, 0.01), 0.0);
    EXPECT_EQ(detail::bridge_hit_probability(0.0, 0.0, 0.1, 0.0), 0.0);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    auto c1 = quick(50'000);
    c1.threads = 1;
    auto c3 = c1;
    c3.threads = 3;
    const auto s = make(OptionKind::DKOCall, 1.3, 1.1, 1.6);
    const auto a = mc_price(s, 0.2, kFlat, c1);
    const auto b = mc_price(s, 0.2, kFlat, c3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.se, b.se);
    EXPECT_EQ(a.samples, 50'000u);
}

TEST(MonteCarlo, SeedChangesEstimate) {
    const auto s = make(OptionKind::VanillaCall, 1.3, {}, {});
    EXPECT_NE(mc_price(s, 0.2, kFlat, quick(20'000, 1)).mean, mc_price(s, 0.2, kFlat, quick(20'000, 2)).mean);
}

TEST(MonteCarlo, VanillaWithinStandardErrors) {
    for (OptionKind k : {OptionKind::VanillaCall, OptionKind::VanillaPut}) {
        const auto s = make(k, 1.35, {}, {});
        const auto e = mc_price(s, 0.2, kFlat, quick());
        EXPECT_NEAR(e.mean, bs_price(s, 0.2, kFlat).value, 4.0 * e.se);
    }
}

TEST(MonteCarlo, AntitheticCountsPairsOnce) {
    auto c = quick(40'000);
    c.antithetic = true;
    const auto s = make(OptionKind::VanillaCall, 1.3, {}, {});
    const auto e = mc_price(s, 0.2, kFlat, c);
    EXPECT_EQ(e.samples, 20'000u);
    EXPECT_NEAR(e.mean, bs_price(s, 0.2, kFlat).value, 4.0 * e.se);
}

TEST(MonteCarlo, BridgeRemovesDiscreteMonitoringBias) {
    // monthly steps: without the bridge the path misses crossings and overprices the no-touch
    auto c = quick(100'000);
    c.steps_per_year = 12;
    const auto s = make(OptionKind::NoTouch, {}, {}, 1.5);
    const double cf = bs_price(s, 0.2, kFlat).value;
    const auto with = mc_price(s, 0.2, kFlat, c);
    c.bridge_correction = false;
    const auto without = mc_price(s, 0.2, kFlat, c);
    EXPECT_NEAR(with.mean, cf, 4.0 * with.se);
    EXPECT_GT(without.mean - cf, 10.0 * without.se);
}

TEST(MonteCarlo, BarrierProductsMatchClosedForm) {
    for (const auto& s : {make(OptionKind::UpOutCall, 1.3, {}, 1.6), make(OptionKind::DownInPut, 1.3, 1.1, {}),
                          make(OptionKind::DoubleNoTouch, {}, 1.1, 1.6), make(OptionKind::OneTouch, {}, 1.05, {})}) {
        const auto e = mc_price(s, 0.2, kFlat, quick());
        EXPECT_NEAR(e.mean, bs_price(s, 0.2, kFlat).value, 4.0 * e.se) << to_string(s.kind);
    }
}

TEST(MonteCarlo, FirstExitLadderAgreesWithSurvival) {
    const std::vector<Barriers> ladder{{{}, 1.45}, {1.15, {}}, {1.1, 1.6}};
    const double mu = kFlat.r_d - kFlat.r_f;
    const auto est = mc_first_exit_ladder(ladder, mu, 0.2, 1.3, 1.3, quick());
    ASSERT_EQ(est.size(), ladder.size());
    for (std::size_t j = 0; j < ladder.size(); ++j) {
        bool warn = false;
        const double p = detail::no_touch_any(ladder[j], 1.3, mu, 0.2, 1.3, warn);
        EXPECT_NEAR(1.0 - est[j].touch.mean, p, 4.0 * est[j].touch.se);
        // expected capped exit time lies between survival probability and one
        EXPECT_GE(est[j].fet.mean, 1.0 - est[j].touch.mean);
        EXPECT_LE(est[j].fet.mean, 1.0);
    }
}

TEST(MonteCarlo, StartingBeyondBarrier) {
    const auto e = mc_price(make(OptionKind::DownOutCall, 1.2, 1.35, {}), 0.2, kFlat, quick(4096));
    EXPECT_EQ(e.mean, 0.0);
    const auto est = mc_first_exit_ladder({{1.35, {}}}, 0.02, 0.2, 1.3, 1.3, quick(4096));
    EXPECT_EQ(est[0].touch.mean, 1.0);
    EXPECT_EQ(est[0].fet.mean, 0.0);
}
