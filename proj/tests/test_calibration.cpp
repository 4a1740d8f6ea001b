#include <gtest/gtest.h>

#include "vvfx/calibration.hpp"

using namespace vvfx;

namespace {

const MarketSnapshot kChf{{}, 1.0902, 0.013, 0.0203};

SmileCurve chf_curve() {
    return build_smile({1.0, 0.1685, -0.013, 0.011, BfKind::TwoVol}, kChf,
                       Conventions::make(DeltaStyle::Spot, PremiumStyle::Included));
}

PdeGrid coarse() {
    PdeGrid g;
    g.nodes = 200;
    g.steps = 200;
    g.refinement_check = false;
    return g;
}

OptionSpec one_touch(std::optional<double> L, std::optional<double> H) {
    OptionSpec s;
    s.kind = OptionKind::OneTouch;
    s.lower_barrier = L;
    s.upper_barrier = H;
    s.tau = 1.0;
    return s;
}

// quotes generated by a known model, with a symmetric two-provider spread around the model price
QuoteSet synthetic(const VVParams& truth, double spread = 0.002) {
    const auto curve = chf_curve();
    const VannaVolgaPricer vv(curve, truth, coarse());
    QuoteSet q;
    int i = 0;
    for (double H : {1.12, 1.18, 1.25, 1.35}) {
        const auto s = one_touch({}, H);
        const double p = vv.price(s).unclamped_price;
        q.instruments.push_back({"up" + std::to_string(i++), s, {p - spread, p + spread}});
    }
    for (double L : {1.05, 0.98, 0.9, 0.82}) {
        const auto s = one_touch(L, {});
        const double p = vv.price(s).unclamped_price;
        q.instruments.push_back({"dn" + std::to_string(i++), s, {p - spread, p + spread}});
    }
    return q;
}

}  // namespace

TEST(Calibration, ErrorMeasure) {
    QuoteSet q;
    q.instruments.push_back({"a", one_touch({}, 1.2), {0.40, 0.42, 0.44}});
    q.instruments.push_back({"b", one_touch({}, 1.3), {0.20}});  // single provider: excluded
    const double e = error(q, {0.43, 123.0});
    EXPECT_NEAR(e, (0.01 / 0.04) * (0.01 / 0.04), 1e-14);
}

TEST(Calibration, ZeroSpreadRejected) {
    QuoteSet q;
    q.instruments.push_back({"flat", one_touch({}, 1.2), {0.40, 0.40}});
    EXPECT_THROW((void)error(q, {0.4}), ValidationError);
}

TEST(Calibration, MisalignedModelRejected) {
    QuoteSet q;
    q.instruments.push_back({"a", one_touch({}, 1.2), {0.40, 0.42}});
    EXPECT_THROW((void)error(q, {}), ValidationError);
}

TEST(Calibration, SmileValuesSubtractTheoreticalValue) {
    const auto sv = smile_values({0.5, 0.3}, {0.52, 0.28}, {0.45, 0.31});
    EXPECT_NEAR(sv.modsv[0], 0.05, 1e-15);
    EXPECT_NEAR(sv.mktsv[1], -0.03, 1e-15);
    EXPECT_THROW((void)smile_values({0.5}, {0.5, 0.1}, {0.4}), ValidationError);
}

TEST(Calibration, Config4RecoversGeneratingParameter) {
    const auto q = synthetic({VicinityVariant::Fet, 0.6, 0.0, 0.6, 0.9});
    FitConfig cfg;
    cfg.constraint = FitConstraint::Config4;
    const auto r = fit(q, cfg, chf_curve(), coarse());
    EXPECT_NEAR(r.params.a, 0.6, 1e-6);
    EXPECT_EQ(r.params.b, 0.0);
    EXPECT_EQ(r.params.c, r.params.a);
    EXPECT_EQ(r.params.variant, VicinityVariant::Fet);
    EXPECT_LT(r.epsilon, 1e-10);
    EXPECT_EQ(r.instruments, 8u);
}

TEST(Calibration, Config1RecoversHalfSplit) {
    const auto q = synthetic({VicinityVariant::Surv, 0.8, 0.4, 0.4, 0.9});
    FitConfig cfg;
    cfg.constraint = FitConstraint::Config1;
    const auto r = fit(q, cfg, chf_curve(), coarse());
    EXPECT_NEAR(r.params.a, 0.8, 1e-6);
    EXPECT_NEAR(r.params.b, 0.4, 1e-6);
    EXPECT_NEAR(r.params.c, 0.4, 1e-6);
    EXPECT_EQ(r.params.variant, VicinityVariant::Surv);
}

TEST(Calibration, FreeFitNoWorseThanConstrained) {
    auto q = synthetic({VicinityVariant::Fet, 0.7, 0.1, 0.4, 0.9});
    // provider skew so no configuration fits exactly
    for (std::size_t i = 0; i < q.instruments.size(); ++i) q.instruments[i].prices[0] += 0.0007 * (i % 3);
    FitConfig c4;
    c4.constraint = FitConstraint::Config4;
    FitConfig fr;
    fr.constraint = FitConstraint::Free;
    const auto curve = chf_curve();
    const auto r4 = fit(q, c4, curve, coarse());
    const auto rf = fit(q, fr, curve, coarse());
    EXPECT_LE(rf.epsilon, r4.epsilon * (1.0 + 1e-12));
    EXPECT_GE(r4.epsilon, 0.0);
}

TEST(Calibration, KindFilterExcludesInstruments) {
    auto q = synthetic({VicinityVariant::Fet, 0.6, 0.0, 0.6, 0.9});
    OptionSpec van;
    van.kind = OptionKind::VanillaCall;
    van.strike = 1.1;
    van.tau = 1.0;
    q.instruments.push_back({"van", van, {0.0, 5.0}});
    FitConfig cfg;
    cfg.kinds = {OptionKind::OneTouch};
    const auto r = fit(q, cfg, chf_curve(), coarse());
    EXPECT_EQ(r.instruments, 8u);
    EXPECT_NEAR(r.params.a, 0.6, 1e-6);
}

TEST(Calibration, NoUsableInstrumentThrows) {
    QuoteSet q;
    q.instruments.push_back({"solo", one_touch({}, 1.2), {0.4}});
    EXPECT_THROW((void)fit(q, FitConfig{}, chf_curve(), coarse()), ValidationError);
}

TEST(Calibration, ConstraintNamesRoundTrip) {
    for (auto c : {FitConstraint::Free, FitConstraint::Config1, FitConstraint::Config2, FitConstraint::Config3,
                   FitConstraint::Config4}) {
        EXPECT_EQ(fit_constraint_from_string(to_string(c)), c);
    }
    EXPECT_THROW((void)fit_constraint_from_string("config9"), ValidationError);
}
