#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "vvfx/calibration.hpp"
#include "vvfx/errors.hpp"
#include "vvfx/exit_metrics.hpp"
#include "vvfx/market_conventions.hpp"
#include "vvfx/mc_oracle.hpp"
#include "vvfx/option_spec.hpp"
#include "vvfx/smile.hpp"
#include "vvfx/vanna_volga.hpp"

namespace vvfx::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Market snapshot file: one pair, one valuation date, one or more tenors.
struct Snapshot {
    std::string pair;
    MarketSnapshot market;
    Conventions conventions;
    std::vector<TenorQuote> tenors;

    [[nodiscard]] const TenorQuote& tenor(std::size_t i) const {
        if (i >= tenors.size()) throw ValidationError("snapshot: tenor index out of range");
        return tenors[i];
    }
};

namespace detail {

[[nodiscard]] inline const json& member(const json& j, std::string_view key, std::string_view ctx) {
    if (!j.is_object()) throw ValidationError(std::string(ctx) + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError(std::string(ctx) + ": missing field '" + std::string(key) + "'");
    return *it;
}

[[nodiscard]] inline double number(const json& j, std::string_view key, std::string_view ctx) {
    const json& v = member(j, key, ctx);
    if (!v.is_number()) throw ValidationError(std::string(ctx) + ": field '" + std::string(key) + "' must be a number");
    return v.get<double>();
}

[[nodiscard]] inline double number_or(const json& j, std::string_view key, double fallback, std::string_view ctx) {
    return j.contains(key) ? number(j, key, ctx) : fallback;
}

[[nodiscard]] inline std::optional<double> optional_number(const json& j, std::string_view key,
                                                           std::string_view ctx) {
    if (!j.contains(key) || j.at(std::string(key)).is_null()) return std::nullopt;
    return number(j, key, ctx);
}

[[nodiscard]] inline std::string text(const json& j, std::string_view key, std::string_view ctx) {
    const json& v = member(j, key, ctx);
    if (!v.is_string()) throw ValidationError(std::string(ctx) + ": field '" + std::string(key) + "' must be a string");
    return v.get<std::string>();
}

[[nodiscard]] inline std::string text_or(const json& j, std::string_view key, std::string_view fallback,
                                         std::string_view ctx) {
    return j.contains(key) ? text(j, key, ctx) : std::string(fallback);
}

inline void check_version(const json& j, std::string_view ctx) {
    const double v = number(j, "schema_version", ctx);
    if (v != kSchemaVersion) {
        throw ValidationError(std::string(ctx) + ": unsupported schema_version " + std::to_string(v));
    }
}

template <class E, std::size_t N>
[[nodiscard]] E parse_enum(const std::string& s, const std::pair<std::string_view, E> (&table)[N],
                           std::string_view ctx) {
    for (const auto& [name, value] : table) {
        if (name == s) return value;
    }
    throw ValidationError(std::string(ctx) + ": unknown value '" + s + "'");
}

template <class E, std::size_t N>
[[nodiscard]] std::string enum_name(E e, const std::pair<std::string_view, E> (&table)[N]) {
    for (const auto& [name, value] : table) {
        if (value == e) return std::string(name);
    }
    return "unknown";
}

inline constexpr std::pair<std::string_view, DeltaStyle> kDeltaStyles[] = {{"spot", DeltaStyle::Spot},
                                                                          {"forward", DeltaStyle::Forward}};
inline constexpr std::pair<std::string_view, PremiumStyle> kPremiumStyles[] = {
    {"excluded", PremiumStyle::Excluded}, {"included", PremiumStyle::Included}};
inline constexpr std::pair<std::string_view, AtmStyle> kAtmStyles[] = {
    {"delta_neutral_excluded", AtmStyle::DeltaNeutralExcluded},
    {"delta_neutral_included", AtmStyle::DeltaNeutralIncluded}};
inline constexpr std::pair<std::string_view, BfKind> kBfKinds[] = {{"one_vol", BfKind::OneVol},
                                                                  {"two_vol", BfKind::TwoVol}};
inline constexpr std::pair<std::string_view, VicinityVariant> kVariants[] = {{"surv", VicinityVariant::Surv},
                                                                            {"fet", VicinityVariant::Fet}};
inline constexpr std::pair<std::string_view, BarrierSide> kSides[] = {{"lower", BarrierSide::Lower},
                                                                     {"upper", BarrierSide::Upper}};

}  // namespace detail

[[nodiscard]] inline json parse(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string(what) + ": malformed JSON: " + e.what());
    }
}

[[nodiscard]] inline json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

[[nodiscard]] inline std::string to_string(VicinityVariant v) { return detail::enum_name(v, detail::kVariants); }
[[nodiscard]] inline std::string to_string(BarrierSide s) { return detail::enum_name(s, detail::kSides); }

[[nodiscard]] inline VicinityVariant variant_from_string(const std::string& s) {
    return detail::parse_enum(s, detail::kVariants, "variant");
}

[[nodiscard]] inline BarrierSide barrier_side_from_string(const std::string& s) {
    return detail::parse_enum(s, detail::kSides, "barrier side");
}

// ---- conventions and snapshot --------------------------------------------------------

[[nodiscard]] inline Conventions conventions_from_json(const json& j) {
    constexpr std::string_view ctx = "conventions";
    Conventions c;
    c.delta_style = detail::parse_enum(detail::text(j, "delta_style", ctx), detail::kDeltaStyles, ctx);
    c.premium_style = detail::parse_enum(detail::text(j, "premium_style", ctx), detail::kPremiumStyles, ctx);
    c.atm_style = j.contains("atm_style")
                      ? detail::parse_enum(detail::text(j, "atm_style", ctx), detail::kAtmStyles, ctx)
                      : Conventions::make(c.delta_style, c.premium_style).atm_style;
    if (!c.consistent()) throw ValidationError("conventions: atm_style does not match premium_style");
    return c;
}

[[nodiscard]] inline json to_json(const Conventions& c) {
    return {{"delta_style", detail::enum_name(c.delta_style, detail::kDeltaStyles)},
            {"premium_style", detail::enum_name(c.premium_style, detail::kPremiumStyles)},
            {"atm_style", detail::enum_name(c.atm_style, detail::kAtmStyles)}};
}

[[nodiscard]] inline TenorQuote tenor_from_json(const json& j, const MarketSnapshot& m) {
    constexpr std::string_view ctx = "tenor";
    TenorQuote q;
    if (j.contains("tau")) {
        q.tau = detail::number(j, "tau", ctx);
    } else {
        q.tau = year_fraction(m.valuation_date, parse_date(detail::text(j, "expiry", ctx)));
    }
    q.sigma_atm = detail::number(j, "sigma_atm", ctx);
    q.sigma_rr25 = detail::number(j, "sigma_rr25", ctx);
    q.sigma_bf25 = detail::number(j, "sigma_bf25", ctx);
    q.bf_kind = detail::parse_enum(detail::text_or(j, "bf_kind", "two_vol", ctx), detail::kBfKinds, ctx);
    if (q.sigma_atm > 2.0) throw ValidationError("tenor: sigma_atm looks like a percentage; use decimals");
    q.validate();
    return q;
}

[[nodiscard]] inline json to_json(const TenorQuote& q) {
    return {{"tau", q.tau},
            {"sigma_atm", q.sigma_atm},
            {"sigma_rr25", q.sigma_rr25},
            {"sigma_bf25", q.sigma_bf25},
            {"bf_kind", detail::enum_name(q.bf_kind, detail::kBfKinds)}};
}

[[nodiscard]] inline Snapshot snapshot_from_json(const json& j) {
    constexpr std::string_view ctx = "snapshot";
    detail::check_version(j, ctx);
    Snapshot s;
    s.pair = detail::text_or(j, "pair", "", ctx);
    s.market.valuation_date = parse_date(detail::text(j, "valuation_date", ctx));
    s.market.spot = detail::number(j, "spot", ctx);
    s.market.r_d = detail::number(j, "r_d", ctx);
    s.market.r_f = detail::number(j, "r_f", ctx);
    s.market.validate();
    if (std::abs(s.market.r_d) > 1.0 || std::abs(s.market.r_f) > 1.0) {
        throw ValidationError("snapshot: rates look like percentages; use decimals");
    }
    s.conventions = conventions_from_json(detail::member(j, "conventions", ctx));
    const json& tenors = detail::member(j, "tenors", ctx);
    if (!tenors.is_array() || tenors.empty()) throw ValidationError("snapshot: 'tenors' must be a non-empty array");
    for (const auto& t : tenors) s.tenors.push_back(tenor_from_json(t, s.market));
    return s;
}

[[nodiscard]] inline json to_json(const Snapshot& s) {
    json tenors = json::array();
    for (const auto& t : s.tenors) tenors.push_back(to_json(t));
    return {{"schema_version", kSchemaVersion},
            {"pair", s.pair},
            {"valuation_date", format_date(s.market.valuation_date)},
            {"spot", s.market.spot},
            {"r_d", s.market.r_d},
            {"r_f", s.market.r_f},
            {"conventions", to_json(s.conventions)},
            {"tenors", tenors}};
}

/// Smile for one tenor; 1-vol butterflies are converted first.
[[nodiscard]] inline SmileCurve smile_for(const Snapshot& s, std::size_t tenor = 0) {
    TenorQuote q = s.tenor(tenor);
    if (q.bf_kind == BfKind::OneVol) q = bf2vol_from_bf1vol(q, s.market, s.conventions);
    return build_smile(q, s.market, s.conventions);
}

// ---- instruments ----------------------------------------------------------------------

[[nodiscard]] inline OptionSpec instrument_from_json(const json& j, double spot) {
    constexpr std::string_view ctx = "instrument";
    OptionSpec s;
    s.kind = option_kind_from_string(detail::text(j, "kind", ctx));
    s.strike = detail::optional_number(j, "strike", ctx);
    s.lower_barrier = detail::optional_number(j, "lower_barrier", ctx);
    s.upper_barrier = detail::optional_number(j, "upper_barrier", ctx);
    s.tau = detail::number(j, "tau", ctx);
    s.notional = detail::number_or(j, "notional", 1.0, ctx);
    s.knock_in_barrier =
        detail::parse_enum(detail::text_or(j, "knock_in_barrier", "lower", ctx), detail::kSides, ctx);
    validate(s, spot);
    return s;
}

[[nodiscard]] inline json to_json(const OptionSpec& s) {
    json j = {{"kind", std::string(to_string(s.kind))}, {"tau", s.tau}, {"notional", s.notional}};
    j["strike"] = s.strike ? json(*s.strike) : json(nullptr);
    j["lower_barrier"] = s.lower_barrier ? json(*s.lower_barrier) : json(nullptr);
    j["upper_barrier"] = s.upper_barrier ? json(*s.upper_barrier) : json(nullptr);
    if (s.kind == OptionKind::KIKOCall || s.kind == OptionKind::KIKOPut) {
        j["knock_in_barrier"] = to_string(s.knock_in_barrier);
    }
    return j;
}

/// An instrument file holds either one instrument object or {"instruments": [...]}.
[[nodiscard]] inline std::vector<OptionSpec> instruments_from_json(const json& j, double spot) {
    detail::check_version(j, "instrument file");
    std::vector<OptionSpec> out;
    if (j.contains("instruments")) {
        const json& arr = j.at("instruments");
        if (!arr.is_array() || arr.empty()) throw ValidationError("instrument file: 'instruments' must be non-empty");
        for (const auto& e : arr) out.push_back(instrument_from_json(e, spot));
    } else {
        out.push_back(instrument_from_json(j, spot));
    }
    return out;
}

// ---- params -----------------------------------------------------------------------------

[[nodiscard]] inline PdeGrid grid_from_json(const json& j) {
    constexpr std::string_view ctx = "pde grid";
    PdeGrid g;
    g.nodes = static_cast<int>(detail::number_or(j, "nodes", g.nodes, ctx));
    g.steps = static_cast<int>(detail::number_or(j, "steps", g.steps, ctx));
    g.implicit_steps = static_cast<int>(detail::number_or(j, "implicit_steps", g.implicit_steps, ctx));
    g.far_boundary_sd = detail::number_or(j, "far_boundary_sd", g.far_boundary_sd, ctx);
    if (j.contains("refinement_check")) g.refinement_check = j.at("refinement_check").get<bool>();
    g.validate();
    return g;
}

[[nodiscard]] inline json to_json(const PdeGrid& g) {
    return {{"nodes", g.nodes},
            {"steps", g.steps},
            {"implicit_steps", g.implicit_steps},
            {"far_boundary_sd", g.far_boundary_sd},
            {"refinement_check", g.refinement_check}};
}

struct ParamsFile {
    VVParams params;
    PdeGrid grid;
};

[[nodiscard]] inline VVParams params_from_json(const json& j) {
    constexpr std::string_view ctx = "params";
    VVParams p;
    p.variant = variant_from_string(detail::text_or(j, "variant", "fet", ctx));
    p.a = detail::number_or(j, "a", p.a, ctx);
    p.b = detail::number_or(j, "b", p.b, ctx);
    p.c = detail::number_or(j, "c", p.c, ctx);
    p.gamma_star = detail::number_or(j, "gamma_star", p.gamma_star, ctx);
    p.validate();
    return p;
}

[[nodiscard]] inline ParamsFile params_file_from_json(const json& j) {
    detail::check_version(j, "params");
    ParamsFile f;
    f.params = params_from_json(j);
    if (j.contains("grid")) f.grid = grid_from_json(j.at("grid"));
    return f;
}

[[nodiscard]] inline json to_json(const VVParams& p) {
    return {{"variant", to_string(p.variant)}, {"a", p.a}, {"b", p.b}, {"c", p.c}, {"gamma_star", p.gamma_star}};
}

// ---- calibration files ------------------------------------------------------------------

[[nodiscard]] inline QuoteSet quotes_from_json(const json& j, double spot) {
    constexpr std::string_view ctx = "quotes";
    detail::check_version(j, ctx);
    const json& arr = detail::member(j, "instruments", ctx);
    if (!arr.is_array()) throw ValidationError("quotes: 'instruments' must be an array");
    QuoteSet q;
    for (const auto& e : arr) {
        QuotedInstrument qi;
        qi.id = detail::text_or(e, "id", "#" + std::to_string(q.instruments.size()), ctx);
        qi.spec = instrument_from_json(detail::member(e, "instrument", ctx), spot);
        const json& prices = detail::member(e, "prices", ctx);
        if (!prices.is_array() || prices.empty()) {
            throw ValidationError("quotes: '" + qi.id + "' needs a non-empty 'prices' array");
        }
        for (const auto& p : prices) {
            if (!p.is_number()) throw ValidationError("quotes: '" + qi.id + "' has a non-numeric price");
            qi.prices.push_back(p.get<double>());
        }
        q.instruments.push_back(std::move(qi));
    }
    q.validate();
    return q;
}

[[nodiscard]] inline json to_json(const QuoteSet& q) {
    json arr = json::array();
    for (const auto& qi : q.instruments) {
        arr.push_back({{"id", qi.id}, {"instrument", to_json(qi.spec)}, {"prices", qi.prices}});
    }
    return {{"schema_version", kSchemaVersion}, {"instruments", arr}};
}

[[nodiscard]] inline FitConfig fit_config_from_json(const json& j) {
    constexpr std::string_view ctx = "fit config";
    detail::check_version(j, ctx);
    FitConfig c;
    c.constraint = fit_constraint_from_string(detail::text_or(j, "constraint", "config4", ctx));
    c.free_variant = variant_from_string(detail::text_or(j, "free_variant", "fet", ctx));
    c.gamma_star = detail::number_or(j, "gamma_star", c.gamma_star, ctx);
    if (j.contains("kinds")) {
        for (const auto& k : j.at("kinds")) c.kinds.push_back(option_kind_from_string(k.get<std::string>()));
    }
    return c;
}

// ---- Monte Carlo config -----------------------------------------------------------------

[[nodiscard]] inline McConfig mc_config_from_json(const json& j) {
    constexpr std::string_view ctx = "mc config";
    McConfig c;
    c.paths = static_cast<std::uint64_t>(detail::number_or(j, "paths", static_cast<double>(c.paths), ctx));
    c.steps_per_year = static_cast<int>(detail::number_or(j, "steps_per_year", c.steps_per_year, ctx));
    c.seed = static_cast<std::uint64_t>(detail::number_or(j, "seed", static_cast<double>(c.seed), ctx));
    if (j.contains("bridge_correction")) c.bridge_correction = j.at("bridge_correction").get<bool>();
    if (j.contains("antithetic")) c.antithetic = j.at("antithetic").get<bool>();
    c.validate();
    return c;
}

// ---- pricing output ---------------------------------------------------------------------

/// Percent of notional: strike products are per unit of Ccy1 and scaled by spot, touch
/// products pay one unit of Ccy2.
[[nodiscard]] inline double percent_of_notional(double price, const OptionSpec& s, double spot) {
    return 100.0 * (has_strike(s.kind) ? price / spot : price);
}

[[nodiscard]] inline std::vector<std::string> flag_names(const PricingFlags& f) {
    std::vector<std::string> out;
    if (f.knocked) out.emplace_back("knocked");
    if (f.clamped_floor) out.emplace_back("clamped_floor");
    if (f.clamped_vanilla) out.emplace_back("clamped_vanilla");
    if (f.clamped_single_ko) out.emplace_back("clamped_single_ko");
    if (f.series_warning) out.emplace_back("series_warning");
    if (f.vicinity_warning) out.emplace_back("vicinity_warning");
    return out;
}

[[nodiscard]] inline json to_json(const PricingResult& r, const OptionSpec& s, double spot) {
    json rules = json::array();
    for (ClampRule c : r.applied_rules) rules.push_back(std::string(to_string(c)));
    auto pct = [&](double v) { return percent_of_notional(v, s, spot); };
    return {{"schema_version", kSchemaVersion},
            {"instrument", to_json(s)},
            {"bstv", r.bstv},
            {"vega_term", r.vega_term},
            {"vanna_term", r.vanna_term},
            {"volga_term", r.volga_term},
            {"p_vanna", r.p_vanna},
            {"p_volga", r.p_volga},
            {"gamma", r.gamma},
            {"unclamped_price", r.unclamped_price},
            {"final_price", r.final_price},
            {"bstv_pct", pct(r.bstv)},
            {"final_pct", pct(r.final_price)},
            {"smile_value_pct", pct(r.final_price - r.bstv)},
            {"flags", flag_names(r.flags)},
            {"applied_rules", rules}};
}

/// Schema check for a rendered PricingResult (used to round-trip CLI output).
inline void validate_pricing_result(const json& j) {
    constexpr std::string_view ctx = "pricing result";
    detail::check_version(j, ctx);
    for (const char* k : {"bstv", "vega_term", "vanna_term", "volga_term", "p_vanna", "p_volga", "gamma",
                          "unclamped_price", "final_price", "bstv_pct", "final_pct", "smile_value_pct"}) {
        (void)detail::number(j, k, ctx);
    }
    if (!detail::member(j, "flags", ctx).is_array() || !detail::member(j, "applied_rules", ctx).is_array()) {
        throw ValidationError("pricing result: flags and applied_rules must be arrays");
    }
    (void)instrument_from_json(detail::member(j, "instrument", ctx), 1.0);
    if (detail::number(j, "final_price", ctx) < 0.0) throw ValidationError("pricing result: negative final price");
}

}  // namespace vvfx::io
