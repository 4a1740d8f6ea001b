#pragma once

// Closed forms against the Monte Carlo oracle, as run by `vvfx verify`.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vvfx/bs_engine.hpp"
#include "vvfx/exit_metrics.hpp"
#include "vvfx/mc_oracle.hpp"
#include "vvfx/sweep.hpp"
#include "vvfx/vv_weights.hpp"

namespace vvfx::tools {

struct VerifyInputs {
    MarketSnapshot market{{}, 1.3, 0.05, 0.03};
    double sigma = 0.20;
    double tau = 1.3;
    McConfig mc{};
};

struct Check {
    std::string name;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct Report {
    std::vector<Check> checks;
    [[nodiscard]] bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
};

inline void add_abs(Report& r, std::string name, double value, double ref, double tol) {
    r.checks.push_back({std::move(name), value, ref, tol, std::abs(value - ref) <= tol});
}

[[nodiscard]] inline Report run_verify(const VerifyInputs& in) {
    Report rep;
    const auto& m = in.market;
    const double s = in.sigma;
    const double tau = in.tau;
    const double spot = m.spot;
    const double sd = s * std::sqrt(tau);
    const double dfd = m.df_d(tau);

    // replication identities
    double ki_ko = 0.0;
    double ot_nt = 0.0;
    for (double kx : {-0.5, 0.0, 0.5}) {
        for (double bx : {0.2, 0.6, 1.2}) {
            const double K = spot * std::exp(kx * sd);
            for (bool up : {true, false}) {
                for (bool call : {true, false}) {
                    OptionSpec ko;
                    ko.tau = tau;
                    ko.strike = K;
                    if (up) ko.upper_barrier = spot * std::exp(bx * sd); else ko.lower_barrier = spot * std::exp(-bx * sd);
                    ko.kind = up ? (call ? OptionKind::UpOutCall : OptionKind::UpOutPut)
                                 : (call ? OptionKind::DownOutCall : OptionKind::DownOutPut);
                    OptionSpec ki = ko;
                    ki.kind = up ? (call ? OptionKind::UpInCall : OptionKind::UpInPut)
                                 : (call ? OptionKind::DownInCall : OptionKind::DownInPut);
                    const double van = vanilla_price(call ? OptionSide::Call : OptionSide::Put, m, K, s, tau);
                    ki_ko = std::max(ki_ko, std::abs(bs_price(ki, s, m).value + bs_price(ko, s, m).value - van));
                    OptionSpec ot = ko;
                    ot.strike.reset();
                    ot.kind = OptionKind::OneTouch;
                    OptionSpec nt = ot;
                    nt.kind = OptionKind::NoTouch;
                    ot_nt = std::max(ot_nt, std::abs(bs_price(ot, s, m).value + bs_price(nt, s, m).value - dfd));
                }
            }
        }
    }
    add_abs(rep, "replication KI+KO=VAN max error", ki_ko, 0.0, 1e-10);
    add_abs(rep, "replication OT+NT=DF max error", ot_nt, 0.0, 1e-10);

    // closed-form weights against a direct 3x3 solve
    {
        const double fwd = forward_price(m, tau);
        const std::array<double, 3> k{fwd * std::exp(-0.7 * sd), fwd * std::exp(0.05 * sd), fwd * std::exp(0.8 * sd)};
        Eigen::Matrix3d A;
        for (int j = 0; j < 3; ++j) {
            const auto g = vanilla_greeks(m, k[static_cast<std::size_t>(j)], s, tau);
            A(0, j) = g.vega;
            A(1, j) = g.vanna;
            A(2, j) = g.volga;
        }
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double K = fwd * std::exp((-1.2 + 0.12 * i) * sd);
            const auto g = vanilla_greeks(m, K, s, tau);
            const Eigen::Vector3d x = A.fullPivLu().solve(Eigen::Vector3d(g.vega, g.vanna, g.volga));
            const auto w = closed_form_weights(K, k, m, tau, s);
            for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(w[static_cast<std::size_t>(j)] - x(j)));
        }
        add_abs(rep, "closed-form weights vs 3x3 solve", worst, 0.0, 1e-10);
    }

    // vicinity measures on an upper-barrier ladder
    {
        std::vector<Barriers> ladder;
        for (double p : {0.2, 0.35, 0.5, 0.65, 0.8}) {
            ladder.push_back({std::nullopt, barrier_for_touch_probability(p, BarrierSide::Upper, s, m, tau)});
        }
        const double mu_d = m.r_d - m.r_f;
        McConfig cf = in.mc;
        cf.seed = in.mc.seed + 1;
        const auto dom = mc_first_exit_ladder(ladder, mu_d, s, spot, tau, in.mc);
        const auto fgn = mc_first_exit_ladder(ladder, mu_d + s * s, s, spot, tau, cf);
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            char name[96];
            const double H = *ladder[i].upper;
            const double surv_mc = 1.0 - 0.5 * (dom[i].touch.mean + fgn[i].touch.mean);
            const double surv_se = 0.5 * std::hypot(dom[i].touch.se, fgn[i].touch.se);
            std::snprintf(name, sizeof name, "gamma_surv H=%.4f vs MC (3 SE)", H);
            add_abs(rep, name, survival_probability(ladder[i], s, m, tau).gamma, surv_mc, 3.0 * surv_se);
            const double fet_mc = 0.5 * (dom[i].fet.mean + fgn[i].fet.mean);
            const double fet_se = 0.5 * std::hypot(dom[i].fet.se, fgn[i].fet.se);
            std::snprintf(name, sizeof name, "gamma_fet H=%.4f vs MC (1%% + 3 SE)", H);
            add_abs(rep, name, fet_solve(ladder[i], s, m, tau).gamma, fet_mc, 0.01 * fet_mc + 3.0 * fet_se);
        }
    }

    // double-barrier series
    {
        int k = 0;
        for (const auto& [lx, ux] : {std::pair{0.6, 0.8}, std::pair{1.0, 0.7}, std::pair{0.8, 1.5}, std::pair{1.5, 1.5}}) {
            OptionSpec d;
            d.tau = tau;
            d.lower_barrier = spot * std::exp(-lx * sd);
            d.upper_barrier = spot * std::exp(ux * sd);
            McConfig c = in.mc;
            for (OptionKind kind : {OptionKind::DKOCall, OptionKind::DKOPut, OptionKind::DoubleNoTouch}) {
                d.kind = kind;
                d.strike = kind == OptionKind::DoubleNoTouch ? std::nullopt : std::optional<double>(spot);
                c.seed = in.mc.seed + 100 + static_cast<std::uint64_t>(k++);
                const BsPrice cf = bs_price(d, s, m);
                const McEstimate e = mc_price(d, s, m, c);
                char name[96];
                std::snprintf(name, sizeof name, "%s L=%.4f U=%.4f vs MC (3 SE)", std::string(to_string(kind)).c_str(),
                              d.L(), d.H());
                add_abs(rep, name, cf.value, e.mean, 3.0 * e.se);
                if (cf.series_warning || cf.series_terms > kMaxSeriesTerms) rep.checks.back().pass = false;
            }
        }
    }
    return rep;
}

inline void print_report(std::ostream& os, const Report& r) {
    char line[256];
    std::snprintf(line, sizeof line, "%-52s %14s %14s %12s  %s\n", "check", "value", "reference", "tolerance",
                  "result");
    os << line;
    for (const auto& c : r.checks) {
        std::snprintf(line, sizeof line, "%-52s %14.8f %14.8f %12.3e  %s\n", c.name.c_str(), c.value, c.reference,
                      c.tolerance, c.pass ? "PASS" : "FAIL");
        os << line;
    }
    os << (r.all_pass() ? "ALL PASS\n" : "FAILURES PRESENT\n");
}

}  // namespace vvfx::tools
