#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vvfx/errors.hpp"
#include "vvfx/option_spec.hpp"
#include "vvfx/smile.hpp"
#include "vvfx/vanna_volga.hpp"

namespace vvfx {

/// One instrument with mid prices from one or more providers (per unit notional).
struct QuotedInstrument {
    std::string id;
    OptionSpec spec;
    std::vector<double> prices;

    [[nodiscard]] double mean() const {
        return std::accumulate(prices.begin(), prices.end(), 0.0) / static_cast<double>(prices.size());
    }
    [[nodiscard]] double min() const { return *std::min_element(prices.begin(), prices.end()); }
    [[nodiscard]] double max() const { return *std::max_element(prices.begin(), prices.end()); }
};

struct QuoteSet {
    std::vector<QuotedInstrument> instruments;

    void validate() const {
        for (const auto& q : instruments) {
            if (q.prices.empty()) throw ValidationError("quotes: instrument '" + q.id + "' has no prices");
            for (double p : q.prices) {
                if (!std::isfinite(p)) throw ValidationError("quotes: non-finite price for '" + q.id + "'");
            }
        }
    }
};

enum class FitConstraint {
    Free,     // a, b, c independent
    Config1,  // b = c = a/2, survival probability
    Config2,  // b = c = a/2, first exit time
    Config3,  // a = c, b = 0, survival probability
    Config4,  // a = c, b = 0, first exit time
};

[[nodiscard]] constexpr std::string_view to_string(FitConstraint c) noexcept {
    switch (c) {
        case FitConstraint::Free: return "free";
        case FitConstraint::Config1: return "config1";
        case FitConstraint::Config2: return "config2";
        case FitConstraint::Config3: return "config3";
        case FitConstraint::Config4: return "config4";
    }
    return "unknown";
}

[[nodiscard]] inline FitConstraint fit_constraint_from_string(std::string_view s) {
    for (auto c : {FitConstraint::Free, FitConstraint::Config1, FitConstraint::Config2, FitConstraint::Config3,
                   FitConstraint::Config4}) {
        if (to_string(c) == s) return c;
    }
    throw ValidationError("fit config: unknown constraint '" + std::string(s) + "'");
}

struct FitConfig {
    FitConstraint constraint = FitConstraint::Config4;
    std::vector<OptionKind> kinds;  // empty: all instruments
    VicinityVariant free_variant = VicinityVariant::Fet;
    double gamma_star = 0.9;

    [[nodiscard]] VicinityVariant variant() const noexcept {
        switch (constraint) {
            case FitConstraint::Config1:
            case FitConstraint::Config3: return VicinityVariant::Surv;
            case FitConstraint::Config2:
            case FitConstraint::Config4: return VicinityVariant::Fet;
            case FitConstraint::Free: break;
        }
        return free_variant;
    }

    /// Columns mapping the free parameters onto (a, b, c).
    [[nodiscard]] std::vector<std::array<double, 3>> basis() const {
        switch (constraint) {
            case FitConstraint::Config1:
            case FitConstraint::Config2: return {{1.0, 0.5, 0.5}};
            case FitConstraint::Config3:
            case FitConstraint::Config4: return {{1.0, 0.0, 1.0}};
            case FitConstraint::Free: break;
        }
        return {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    }

    [[nodiscard]] bool accepts(OptionKind k) const {
        return kinds.empty() || std::find(kinds.begin(), kinds.end(), k) != kinds.end();
    }
};

struct SmileValues {
    std::vector<double> modsv;
    std::vector<double> mktsv;
};

/// MODSV = model - BSTV and MKTSV = market - BSTV, element-wise.
[[nodiscard]] inline SmileValues smile_values(const std::vector<double>& model, const std::vector<double>& market,
                                              const std::vector<double>& bstv) {
    if (model.size() != bstv.size() || market.size() != bstv.size()) {
        throw ValidationError("smile_values: misaligned instrument lists");
    }
    SmileValues sv;
    sv.modsv.reserve(bstv.size());
    sv.mktsv.reserve(bstv.size());
    for (std::size_t i = 0; i < bstv.size(); ++i) {
        sv.modsv.push_back(model[i] - bstv[i]);
        sv.mktsv.push_back(market[i] - bstv[i]);
    }
    return sv;
}

/// Instruments that enter the error measure: matching the filter and quoted by at least two
/// providers (the provider spread is undefined otherwise).
[[nodiscard]] inline std::vector<std::size_t> error_instruments(const QuoteSet& q, const FitConfig* cfg = nullptr) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < q.instruments.size(); ++i) {
        const auto& inst = q.instruments[i];
        if (cfg && !cfg->accepts(inst.spec.kind)) continue;
        if (inst.prices.size() < 2) continue;
        if (!(inst.max() > inst.min())) {
            throw ValidationError("error: zero provider spread for instrument '" + inst.id + "'");
        }
        idx.push_back(i);
    }
    return idx;
}

/// sum_i ((MODSV_i - mean MKTSV_i) / (max_i - min_i))^2 over the instruments with a spread.
/// `model` is aligned with quotes.instruments.
[[nodiscard]] inline double error(const QuoteSet& quotes, const std::vector<double>& model) {
    if (model.size() != quotes.instruments.size()) throw ValidationError("error: misaligned model prices");
    double eps = 0.0;
    for (std::size_t i : error_instruments(quotes)) {
        const auto& q = quotes.instruments[i];
        // the BSTV cancels between MODSV and MKTSV
        const double z = (model[i] - q.mean()) / (q.max() - q.min());
        eps += z * z;
    }
    return eps;
}

struct FitResult {
    VVParams params;
    double epsilon = 0.0;          // on unclamped corrections, the minimised objective
    double epsilon_clamped = 0.0;  // same instruments, prices after the no-arbitrage clamps
    std::size_t instruments = 0;
    bool regularized = false;
};

/// Least-squares fit of (a, b, c). For fixed gamma each unclamped price is affine in the
/// coefficients, so the problem reduces to a linear regression on the provider-spread
/// weighted residuals.
[[nodiscard]] inline FitResult fit(const QuoteSet& quotes, const FitConfig& cfg, const SmileCurve& curve,
                                   const PdeGrid& grid = {}) {
    quotes.validate();
    const auto idx = error_instruments(quotes, &cfg);
    if (idx.empty()) throw ValidationError("fit: no instrument with two or more providers matches the filter");

    VVParams base;
    base.variant = cfg.variant();
    base.gamma_star = cfg.gamma_star;
    auto with = [&](double a, double b, double c) {
        VVParams p = base;
        p.a = a;
        p.b = b;
        p.c = c;
        return p;
    };
    const VannaVolgaPricer p0(curve, with(0, 0, 0), grid);
    const std::array<VannaVolgaPricer, 3> pe{VannaVolgaPricer(curve, with(1, 0, 0), grid),
                                             VannaVolgaPricer(curve, with(0, 1, 0), grid),
                                             VannaVolgaPricer(curve, with(0, 0, 1), grid)};
    const auto basis = cfg.basis();
    const auto n = static_cast<Eigen::Index>(idx.size());
    const auto k = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd A(n, k);
    Eigen::VectorXd y(n);
    std::vector<double> gammas(idx.size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& q = quotes.instruments[idx[static_cast<std::size_t>(r)]];
        const double g = p0.vicinity_of(barriers_of(q.spec), q.spec.tau).gamma;
        gammas[static_cast<std::size_t>(r)] = g;
        const double spread = q.max() - q.min();
        const double u0 = p0.price(q.spec, g).unclamped_price;
        std::array<double, 3> f{};
        for (std::size_t j = 0; j < 3; ++j) f[j] = pe[j].price(q.spec, g).unclamped_price - u0;
        for (Eigen::Index c = 0; c < k; ++c) {
            const auto& col = basis[static_cast<std::size_t>(c)];
            A(r, c) = (col[0] * f[0] + col[1] * f[1] + col[2] * f[2]) / spread;
        }
        y(r) = (q.mean() - u0) / spread;
    }

    if (!(A.norm() > 0.0)) throw NumericalError("fit: regression matrix is zero (no smile sensitivity)");
    Eigen::MatrixXd ata = A.transpose() * A;
    const Eigen::VectorXd aty = A.transpose() * y;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(ata);
    const auto& sv = svd.singularValues();
    FitResult res;
    if (!(sv(k - 1) > 1e-12 * sv(0))) {
        ata += 1e-10 * Eigen::MatrixXd::Identity(k, k) * std::max(ata.trace() / static_cast<double>(k), 1.0);
        res.regularized = true;
    }
    const Eigen::VectorXd theta = ata.ldlt().solve(aty);
    if (!theta.allFinite()) throw NumericalError("fit: regression solve produced non-finite coefficients");

    std::array<double, 3> abc{0.0, 0.0, 0.0};
    for (Eigen::Index c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < 3; ++j) abc[j] += theta(c) * basis[static_cast<std::size_t>(c)][j];
    }
    res.params = with(abc[0], abc[1], abc[2]);
    res.instruments = idx.size();
    const Eigen::VectorXd resid = A * theta - y;
    res.epsilon = resid.squaredNorm();

    const VannaVolgaPricer fitted(curve, res.params, grid);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& q = quotes.instruments[idx[r]];
        const double z = (fitted.price(q.spec, gammas[r]).final_price - q.mean()) / (q.max() - q.min());
        res.epsilon_clamped += z * z;
    }
    return res;
}

}  // namespace vvfx
