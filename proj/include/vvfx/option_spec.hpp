#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "vvfx/errors.hpp"
#include "vvfx/market_conventions.hpp"

namespace vvfx {

enum class OptionKind {
    VanillaCall,
    VanillaPut,
    UpOutCall,  // reverse knock-out when the strike is below the barrier
    DownOutCall,
    UpOutPut,
    DownOutPut,
    UpInCall,
    DownInCall,
    UpInPut,
    DownInPut,
    DKOCall,
    DKOPut,
    DKICall,
    DKIPut,
    KIKOCall,  // knocks in at one barrier unless the other is touched first or later
    KIKOPut,
    OneTouch,
    NoTouch,
    DoubleOneTouch,
    DoubleNoTouch,
};

enum class BarrierSide { Lower, Upper };

/// Instrument descriptor. Prices are per unit of notional; strike products pay in Ccy2
/// per unit of Ccy1, touch products pay one unit of Ccy2 at maturity.
struct OptionSpec {
    OptionKind kind = OptionKind::VanillaCall;
    std::optional<double> strike;
    std::optional<double> lower_barrier;
    std::optional<double> upper_barrier;
    double tau = 1.0;
    double notional = 1.0;
    /// For KIKO kinds: which barrier activates the option; the other one extinguishes it.
    BarrierSide knock_in_barrier = BarrierSide::Lower;

    [[nodiscard]] double K() const { return strike.value(); }
    [[nodiscard]] double L() const { return lower_barrier.value(); }
    [[nodiscard]] double H() const { return upper_barrier.value(); }
};

[[nodiscard]] constexpr bool has_strike(OptionKind k) noexcept {
    switch (k) {
        case OptionKind::OneTouch:
        case OptionKind::NoTouch:
        case OptionKind::DoubleOneTouch:
        case OptionKind::DoubleNoTouch:
            return false;
        default:
            return true;
    }
}

[[nodiscard]] constexpr bool is_treasury(OptionKind k) noexcept { return !has_strike(k); }

[[nodiscard]] constexpr bool is_vanilla(OptionKind k) noexcept {
    return k == OptionKind::VanillaCall || k == OptionKind::VanillaPut;
}

[[nodiscard]] constexpr bool is_double_barrier(OptionKind k) noexcept {
    switch (k) {
        case OptionKind::DKOCall:
        case OptionKind::DKOPut:
        case OptionKind::DKICall:
        case OptionKind::DKIPut:
        case OptionKind::KIKOCall:
        case OptionKind::KIKOPut:
        case OptionKind::DoubleOneTouch:
        case OptionKind::DoubleNoTouch:
            return true;
        default:
            return false;
    }
}

[[nodiscard]] constexpr bool needs_upper(OptionKind k) noexcept {
    switch (k) {
        case OptionKind::UpOutCall:
        case OptionKind::UpOutPut:
        case OptionKind::UpInCall:
        case OptionKind::UpInPut:
            return true;
        default:
            return is_double_barrier(k);
    }
}

[[nodiscard]] constexpr bool needs_lower(OptionKind k) noexcept {
    switch (k) {
        case OptionKind::DownOutCall:
        case OptionKind::DownOutPut:
        case OptionKind::DownInCall:
        case OptionKind::DownInPut:
            return true;
        default:
            return is_double_barrier(k);
    }
}

[[nodiscard]] constexpr bool is_single_touch(OptionKind k) noexcept {
    return k == OptionKind::OneTouch || k == OptionKind::NoTouch;
}

[[nodiscard]] constexpr OptionSide payoff_side(OptionKind k) noexcept {
    switch (k) {
        case OptionKind::VanillaPut:
        case OptionKind::UpOutPut:
        case OptionKind::DownOutPut:
        case OptionKind::UpInPut:
        case OptionKind::DownInPut:
        case OptionKind::DKOPut:
        case OptionKind::DKIPut:
        case OptionKind::KIKOPut:
            return OptionSide::Put;
        default:
            return OptionSide::Call;
    }
}

/// Structural validation against the current spot; throws ValidationError.
inline void validate(const OptionSpec& s, double spot) {
    auto fail = [](const std::string& m) { throw ValidationError("instrument: " + m); };
    if (!(s.tau > 0.0)) fail("tau must be > 0");
    if (!(s.notional > 0.0)) fail("notional must be > 0");
    if (has_strike(s.kind) != s.strike.has_value()) fail("strike present iff the kind has a strike");
    if (s.strike && !(*s.strike > 0.0)) fail("strike must be > 0");
    if (s.lower_barrier && !(*s.lower_barrier > 0.0)) fail("lower barrier must be > 0");
    if (s.upper_barrier && !(*s.upper_barrier > 0.0)) fail("upper barrier must be > 0");
    if (is_single_touch(s.kind)) {
        if (s.lower_barrier.has_value() == s.upper_barrier.has_value()) {
            fail("single touch products take exactly one barrier");
        }
        return;
    }
    if (needs_lower(s.kind) != s.lower_barrier.has_value()) fail("lower barrier presence mismatch");
    if (needs_upper(s.kind) != s.upper_barrier.has_value()) fail("upper barrier presence mismatch");
    if (s.lower_barrier && s.upper_barrier && !(*s.lower_barrier < *s.upper_barrier)) {
        fail("lower barrier must be below upper barrier");
    }
    (void)spot;
}

[[nodiscard]] inline std::string_view to_string(OptionKind k) noexcept {
    switch (k) {
        case OptionKind::VanillaCall: return "vanilla_call";
        case OptionKind::VanillaPut: return "vanilla_put";
        case OptionKind::UpOutCall: return "up_out_call";
        case OptionKind::DownOutCall: return "down_out_call";
        case OptionKind::UpOutPut: return "up_out_put";
        case OptionKind::DownOutPut: return "down_out_put";
        case OptionKind::UpInCall: return "up_in_call";
        case OptionKind::DownInCall: return "down_in_call";
        case OptionKind::UpInPut: return "up_in_put";
        case OptionKind::DownInPut: return "down_in_put";
        case OptionKind::DKOCall: return "dko_call";
        case OptionKind::DKOPut: return "dko_put";
        case OptionKind::DKICall: return "dki_call";
        case OptionKind::DKIPut: return "dki_put";
        case OptionKind::KIKOCall: return "kiko_call";
        case OptionKind::KIKOPut: return "kiko_put";
        case OptionKind::OneTouch: return "one_touch";
        case OptionKind::NoTouch: return "no_touch";
        case OptionKind::DoubleOneTouch: return "double_one_touch";
        case OptionKind::DoubleNoTouch: return "double_no_touch";
    }
    return "unknown";
}

[[nodiscard]] inline OptionKind option_kind_from_string(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(OptionKind::DoubleNoTouch); ++i) {
        const auto k = static_cast<OptionKind>(i);
        if (to_string(k) == s) return k;
    }
    if (s == "rko_call") return OptionKind::UpOutCall;
    throw ValidationError("instrument: unknown kind '" + std::string(s) + "'");
}

}  // namespace vvfx
