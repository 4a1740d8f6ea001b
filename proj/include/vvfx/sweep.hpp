#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vvfx/bs_engine.hpp"
#include "vvfx/errors.hpp"
#include "vvfx/io.hpp"
#include "vvfx/numerics.hpp"
#include "vvfx/vanna_volga.hpp"

namespace vvfx {

/// Barrier level whose one-touch BSTV / DF_d equals `target`.
[[nodiscard]] inline double barrier_for_touch_probability(double target, BarrierSide side, double sigma,
                                                          const MarketSnapshot& m, double tau) {
    if (!(target > 0.0 && target < 1.0)) throw NoSolutionError("touch probability target must lie in (0,1)");
    const double mu = m.r_d - m.r_f;
    const double sign = side == BarrierSide::Upper ? 1.0 : -1.0;
    auto prob = [&](double d) {
        return detail::touch_probability(m.spot, m.spot * std::exp(sign * d), side, mu, sigma, tau) - target;
    };
    const double d_max = 12.0 * sigma * std::sqrt(tau);
    const double d_min = 1e-10;
    if (!(prob(d_min) > 0.0) || !(prob(d_max) < 0.0)) {
        throw NoSolutionError("touch probability target unreachable within 12 standard deviations");
    }
    const double d = num::find_root(prob, d_min, d_max, 1e-14);
    return m.spot * std::exp(sign * d);
}

struct SweepModel {
    std::string name;
    VVParams params;
};

struct SweepSpec {
    OptionSpec instrument;  // template; the ladder barrier is overwritten per row
    BarrierSide ladder_side = BarrierSide::Upper;
    std::vector<double> levels;         // absolute barrier levels, or
    std::vector<double> touch_targets;  // touch probabilities to invert
    std::optional<BarrierSide> fixed_side;  // other barrier of a double product solved from a touch probability
    double fixed_touch_probability = 0.1;
    std::vector<SweepModel> models;
    PdeGrid grid;
};

struct SweepRow {
    double barrier = 0.0;
    std::optional<double> target;
    double bstv = 0.0;
    std::vector<double> prices;  // final VV price per model
    std::string error;           // non-empty when the row could not be produced
};

[[nodiscard]] inline SweepSpec sweep_spec_from_json(const io::json& j, double spot) {
    constexpr std::string_view ctx = "sweep";
    io::detail::check_version(j, ctx);
    SweepSpec s;
    const auto& tj = io::detail::member(j, "instrument", ctx);
    // the template may leave the ladder barrier empty; validate after the ladder is applied
    s.instrument.kind = option_kind_from_string(io::detail::text(tj, "kind", ctx));
    s.instrument.strike = io::detail::optional_number(tj, "strike", ctx);
    s.instrument.lower_barrier = io::detail::optional_number(tj, "lower_barrier", ctx);
    s.instrument.upper_barrier = io::detail::optional_number(tj, "upper_barrier", ctx);
    s.instrument.tau = io::detail::number(tj, "tau", ctx);
    s.instrument.notional = io::detail::number_or(tj, "notional", 1.0, ctx);
    s.instrument.knock_in_barrier = io::barrier_side_from_string(io::detail::text_or(tj, "knock_in_barrier", "lower", ctx));

    const auto& lj = io::detail::member(j, "ladder", ctx);
    s.ladder_side = io::barrier_side_from_string(io::detail::text_or(lj, "barrier", "upper", ctx));
    const std::string type = io::detail::text(lj, "type", ctx);
    auto values = [&](const char* key) {
        std::vector<double> v;
        for (const auto& e : io::detail::member(lj, key, ctx)) v.push_back(e.get<double>());
        if (v.empty()) throw ValidationError("sweep: ladder is empty");
        return v;
    };
    if (type == "levels") {
        s.levels = values("levels");
        for (std::size_t i = 1; i < s.levels.size(); ++i) {
            if (!(s.levels[i] != s.levels[i - 1]) ||
                (s.levels[i] > s.levels[i - 1]) != (s.levels[1] > s.levels[0])) {
                throw ValidationError("sweep: barrier ladder must be strictly monotone");
            }
        }
        for (double l : s.levels) {
            if (!(l > 0.0)) throw ValidationError("sweep: barrier levels must be positive");
        }
    } else if (type == "touch_probability") {
        s.touch_targets = values("targets");
        for (std::size_t i = 0; i < s.touch_targets.size(); ++i) {
            const double t = s.touch_targets[i];
            if (!(t > 0.0 && t < 1.0)) throw ValidationError("sweep: touch probability targets must lie in (0,1)");
            if (i > 0 && !(t != s.touch_targets[i - 1])) throw ValidationError("sweep: targets must be distinct");
        }
    } else {
        throw ValidationError("sweep: ladder type must be 'levels' or 'touch_probability'");
    }
    if (j.contains("fixed")) {
        const auto& fj = j.at("fixed");
        s.fixed_side = io::barrier_side_from_string(io::detail::text(fj, "barrier", ctx));
        s.fixed_touch_probability = io::detail::number(fj, "touch_probability", ctx);
        if (*s.fixed_side == s.ladder_side) throw ValidationError("sweep: fixed and ladder barrier coincide");
    }
    if (j.contains("models")) {
        for (const auto& mj : j.at("models")) {
            s.models.push_back({io::detail::text(mj, "name", ctx), io::params_from_json(mj)});
        }
    } else {
        VVParams surv;
        surv.variant = VicinityVariant::Surv;
        s.models = {{"VV_surv", surv}, {"VV_fet", VVParams{}}};
    }
    if (j.contains("grid")) s.grid = io::grid_from_json(j.at("grid"));
    (void)spot;
    return s;
}

/// One row per ladder point: BSTV and the final VV price of every model.
[[nodiscard]] inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SmileCurve& curve) {
    const auto& m = curve.snapshot();
    const double s0 = curve.sigma_atm();
    OptionSpec base = spec.instrument;
    if (spec.fixed_side) {
        const double b = barrier_for_touch_probability(spec.fixed_touch_probability, *spec.fixed_side, s0, m, base.tau);
        (*spec.fixed_side == BarrierSide::Lower ? base.lower_barrier : base.upper_barrier) = b;
    }
    std::vector<VannaVolgaPricer> pricers;
    for (const auto& mdl : spec.models) pricers.emplace_back(curve, mdl.params, spec.grid);

    const std::size_t n = spec.levels.empty() ? spec.touch_targets.size() : spec.levels.size();
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < n; ++i) {
        SweepRow row;
        try {
            if (spec.levels.empty()) {
                row.target = spec.touch_targets[i];
                row.barrier = barrier_for_touch_probability(*row.target, spec.ladder_side, s0, m, base.tau);
            } else {
                row.barrier = spec.levels[i];
            }
            OptionSpec s = base;
            (spec.ladder_side == BarrierSide::Lower ? s.lower_barrier : s.upper_barrier) = row.barrier;
            validate(s, m.spot);
            row.bstv = bs_price(s, s0, m).value;
            for (const auto& p : pricers) row.prices.push_back(p.price(s).final_price);
        } catch (const std::exception& e) {
            row.error = e.what();
            row.prices.clear();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace vvfx
