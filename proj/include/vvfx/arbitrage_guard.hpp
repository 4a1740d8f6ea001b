#pragma once

#include <algorithm>
#include <optional>
#include <string_view>
#include <vector>

#include "vvfx/errors.hpp"
#include "vvfx/option_spec.hpp"

namespace vvfx {

enum class ClampRule { FloorZero, KoLeVanilla, DkoLeKo1, DkoLeKo2, WkoBounds };

[[nodiscard]] constexpr std::string_view to_string(ClampRule r) noexcept {
    switch (r) {
        case ClampRule::FloorZero: return "floor_zero";
        case ClampRule::KoLeVanilla: return "ko_le_vanilla";
        case ClampRule::DkoLeKo1: return "dko_le_ko1";
        case ClampRule::DkoLeKo2: return "dko_le_ko2";
        case ClampRule::WkoBounds: return "wko_bounds";
    }
    return "unknown";
}

struct ClampReport {
    double original = 0.0;
    double clamped = 0.0;
    std::vector<ClampRule> applied_rules;
};

/// One signed leg of a replication. A cash leg pays one unit of Ccy2 at the instrument's expiry.
struct Constituent {
    double sign = 1.0;
    bool cash = false;
    OptionSpec spec;
};

namespace detail {

[[nodiscard]] inline OptionSpec with_kind(OptionSpec s, OptionKind k) {
    s.kind = k;
    return s;
}

[[nodiscard]] inline OptionSpec single_barrier(OptionSpec s, OptionKind k, BarrierSide keep) {
    s.kind = k;
    if (keep == BarrierSide::Lower) s.upper_barrier.reset(); else s.lower_barrier.reset();
    return s;
}

}  // namespace detail

/// Knock-out counterpart of a single knock-in kind, e.g. UpInCall -> UpOutCall.
[[nodiscard]] inline OptionKind knock_out_of(OptionKind k) {
    switch (k) {
        case OptionKind::UpInCall: return OptionKind::UpOutCall;
        case OptionKind::DownInCall: return OptionKind::DownOutCall;
        case OptionKind::UpInPut: return OptionKind::UpOutPut;
        case OptionKind::DownInPut: return OptionKind::DownOutPut;
        case OptionKind::DKICall: return OptionKind::DKOCall;
        case OptionKind::DKIPut: return OptionKind::DKOPut;
        default: throw DomainError("knock_out_of: not a knock-in kind");
    }
}

/// Single knock-out keeping only the barrier on `side`, e.g. the KO(1)/KO(2) of a DKO.
[[nodiscard]] inline OptionSpec single_knock_out(const OptionSpec& s, BarrierSide side) {
    const bool call = payoff_side(s.kind) == OptionSide::Call;
    const OptionKind k = side == BarrierSide::Lower ? (call ? OptionKind::DownOutCall : OptionKind::DownOutPut)
                                                    : (call ? OptionKind::UpOutCall : OptionKind::UpOutPut);
    return detail::single_barrier(s, k, side);
}

/// Single no-touch keeping only the barrier on `side`.
[[nodiscard]] inline OptionSpec single_no_touch(const OptionSpec& s, BarrierSide side) {
    return detail::single_barrier(s, OptionKind::NoTouch, side);
}

[[nodiscard]] inline OptionSpec vanilla_of(const OptionSpec& s) {
    OptionSpec v = s;
    v.kind = payoff_side(s.kind) == OptionSide::Call ? OptionKind::VanillaCall : OptionKind::VanillaPut;
    v.lower_barrier.reset();
    v.upper_barrier.reset();
    return v;
}

/// Replication into vanillas, knock-outs, no-touches and cash.
[[nodiscard]] inline std::vector<Constituent> decompose(const OptionSpec& s) {
    switch (s.kind) {
        case OptionKind::VanillaCall:
        case OptionKind::VanillaPut:
        case OptionKind::UpOutCall:
        case OptionKind::DownOutCall:
        case OptionKind::UpOutPut:
        case OptionKind::DownOutPut:
        case OptionKind::DKOCall:
        case OptionKind::DKOPut:
        case OptionKind::NoTouch:
        case OptionKind::DoubleNoTouch:
            return {{1.0, false, s}};
        case OptionKind::UpInCall:
        case OptionKind::DownInCall:
        case OptionKind::UpInPut:
        case OptionKind::DownInPut:
        case OptionKind::DKICall:
        case OptionKind::DKIPut:
            return {{1.0, false, vanilla_of(s)}, {-1.0, false, detail::with_kind(s, knock_out_of(s.kind))}};
        case OptionKind::KIKOCall:
        case OptionKind::KIKOPut: {
            const BarrierSide ko_side =
                s.knock_in_barrier == BarrierSide::Lower ? BarrierSide::Upper : BarrierSide::Lower;
            const auto dko =
                detail::with_kind(s, payoff_side(s.kind) == OptionSide::Call ? OptionKind::DKOCall : OptionKind::DKOPut);
            return {{1.0, false, single_knock_out(s, ko_side)}, {-1.0, false, dko}};
        }
        case OptionKind::OneTouch:
            return {{1.0, true, s}, {-1.0, false, detail::with_kind(s, OptionKind::NoTouch)}};
        case OptionKind::DoubleOneTouch:
            return {{1.0, true, s}, {-1.0, false, detail::with_kind(s, OptionKind::DoubleNoTouch)}};
    }
    throw DomainError("decompose: unsupported kind");
}

/// Upper references a constituent price must respect. For no-touches the "vanilla" is the
/// discounted unit cash amount; for double products ko1/ko2 are the single-barrier legs.
struct ClampRefs {
    std::optional<double> vanilla;
    std::optional<double> ko1;
    std::optional<double> ko2;
};

/// Applies floor -> vanilla bound -> single knock-out bounds, in that order. References are
/// floored at zero first so no later rule can undo an earlier one.
[[nodiscard]] inline ClampReport clamp(double price, const ClampRefs& refs = {}) {
    ClampReport r{price, price, {}};
    auto cap = [&r](const std::optional<double>& ref, ClampRule rule) {
        if (!ref) return;
        const double bound = std::max(*ref, 0.0);
        if (r.clamped > bound) {
            r.clamped = bound;
            r.applied_rules.push_back(rule);
        }
    };
    if (r.clamped < 0.0) {
        r.clamped = 0.0;
        r.applied_rules.push_back(ClampRule::FloorZero);
    }
    cap(refs.vanilla, ClampRule::KoLeVanilla);
    cap(refs.ko1, ClampRule::DkoLeKo1);
    cap(refs.ko2, ClampRule::DkoLeKo2);
    return r;
}

/// Window knock-out bounds: continuously monitored KO <= WKO <= vanilla, with the price
/// supplied externally.
[[nodiscard]] inline ClampReport clamp_window(double wko, double vanilla, double american_ko) {
    ClampReport r{wko, wko, {}};
    const double hi = std::max(vanilla, 0.0);
    const double lo = std::clamp(american_ko, 0.0, hi);
    const double c = std::clamp(wko, lo, hi);
    if (c != wko) {
        r.clamped = c;
        r.applied_rules.push_back(ClampRule::WkoBounds);
    }
    return r;
}

}  // namespace vvfx
