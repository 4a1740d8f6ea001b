#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "vvfx/errors.hpp"
#include "vvfx/exit_metrics.hpp"
#include "vvfx/market_conventions.hpp"
#include "vvfx/option_spec.hpp"

namespace vvfx {

/// Monte Carlo settings for the GBM oracle. Paths are simulated in batches of
/// kMcBatchSize, each batch with its own generator seeded from (seed, batch index), so the
/// estimate does not depend on the number of threads.
struct McConfig {
    std::uint64_t paths = 1'000'000;
    int steps_per_year = 365;
    std::uint64_t seed = 42;
    bool bridge_correction = true;
    bool antithetic = false;
    unsigned threads = 0;  // 0: VVFX_THREADS if set, else hardware concurrency

    void validate() const {
        if (paths < 2) throw ValidationError("mc: need at least 2 paths");
        if (steps_per_year < 1) throw ValidationError("mc: steps_per_year must be >= 1");
    }
};

inline constexpr std::uint64_t kMcBatchSize = 4096;

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::uint64_t samples = 0;  // independent samples (antithetic pairs count once)
};

struct ExitEstimate {
    McEstimate fet;    // mean of min(first passage, tau) / tau
    McEstimate touch;  // touch frequency
};

namespace detail {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// SplitMix64 as a uniform random bit generator; one instance per path batch.
struct SplitMix64 {
    using result_type = std::uint64_t;
    std::uint64_t state;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }
    result_type operator()() noexcept {
        const std::uint64_t r = splitmix64(state);
        state += 0x9E3779B97F4A7C15ULL;
        return r;
    }
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
};

[[nodiscard]] inline unsigned mc_threads(const McConfig& cfg) {
    unsigned n = cfg.threads;
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("VVFX_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
        }
    }
    return std::max(1u, n);
}

struct Moments {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::uint64_t n = 0;

    explicit Moments(std::size_t k = 0) : sum(k, 0.0), sumsq(k, 0.0) {}
    void merge(const Moments& o) {
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += o.sum[i];
            sumsq[i] += o.sumsq[i];
        }
        n += o.n;
    }
};

/// Pairwise tree reduction in batch order.
[[nodiscard]] inline Moments reduce_pairwise(std::vector<Moments> v) {
    while (v.size() > 1) {
        std::vector<Moments> next;
        next.reserve((v.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < v.size(); i += 2) {
            v[i].merge(v[i + 1]);
            next.push_back(std::move(v[i]));
        }
        if (v.size() % 2 == 1) next.push_back(std::move(v.back()));
        v = std::move(next);
    }
    return v.empty() ? Moments{} : std::move(v.front());
}

/// Per-step GBM draws shared by a path and its antithetic twin.
struct PathDraws {
    std::vector<double> z;
    std::vector<double> u_lower;
    std::vector<double> u_upper;
};

/// Runs `samples` evaluations of eval(draws, sign, out) with out sized k; antithetic
/// averaging happens here. Returns per-output mean and standard error.
template <class Eval>
[[nodiscard]] std::vector<McEstimate> run_mc(const McConfig& cfg, int steps, std::size_t k, bool need_lower,
                                             bool need_upper, Eval&& eval) {
    cfg.validate();
    const std::uint64_t samples = cfg.antithetic ? std::max<std::uint64_t>(1, cfg.paths / 2) : cfg.paths;
    const std::uint64_t n_batches = (samples + kMcBatchSize - 1) / kMcBatchSize;
    std::vector<Moments> batch(n_batches, Moments(k));

    auto run_batch = [&](std::uint64_t b) {
        SplitMix64 rng{splitmix64(cfg.seed ^ splitmix64(b + 1))};
        boost::random::normal_distribution<double> normal;  // ziggurat
        PathDraws d{std::vector<double>(steps), std::vector<double>(need_lower ? steps : 0),
                    std::vector<double>(need_upper ? steps : 0)};
        std::vector<double> out(k), out2(k);
        Moments& mo = batch[b];
        const std::uint64_t begin = b * kMcBatchSize;
        const std::uint64_t end = std::min(samples, begin + kMcBatchSize);
        for (std::uint64_t p = begin; p < end; ++p) {
            for (int i = 0; i < steps; ++i) {
                d.z[i] = normal(rng);
                if (need_lower) d.u_lower[i] = rng.uniform();
                if (need_upper) d.u_upper[i] = rng.uniform();
            }
            eval(d, 1.0, out);
            if (cfg.antithetic) {
                eval(d, -1.0, out2);
                for (std::size_t j = 0; j < k; ++j) out[j] = 0.5 * (out[j] + out2[j]);
            }
            for (std::size_t j = 0; j < k; ++j) {
                mo.sum[j] += out[j];
                mo.sumsq[j] += out[j] * out[j];
            }
            ++mo.n;
        }
    };

    const unsigned nt = std::min<std::uint64_t>(mc_threads(cfg), n_batches);
    if (nt <= 1) {
        for (std::uint64_t b = 0; b < n_batches; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) {
            pool.emplace_back([&, t] {
                for (std::uint64_t b = t; b < n_batches; b += nt) run_batch(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    const Moments tot = reduce_pairwise(std::move(batch));
    std::vector<McEstimate> est(k);
    const double n = static_cast<double>(tot.n);
    for (std::size_t j = 0; j < k; ++j) {
        const double mean = tot.sum[j] / n;
        const double var = std::max(tot.sumsq[j] / n - mean * mean, 0.0) * n / (n - 1.0);
        est[j] = {mean, std::sqrt(var / n), tot.n};
    }
    return est;
}

[[nodiscard]] inline int mc_steps(const McConfig& cfg, double tau) {
    return std::max(1, static_cast<int>(std::ceil(cfg.steps_per_year * tau - 1e-9)));
}

/// Brownian-bridge probability that a log path from x0 to x1 over dt touched log-barrier b
/// (both endpoints on the same side).
[[nodiscard]] inline double bridge_hit_probability(double x0, double x1, double b, double var_dt) {
    if (!(var_dt > 0.0)) return 0.0;
    const double arg = 2.0 * (b - x0) * (b - x1) / var_dt;
    return arg > 40.0 ? 0.0 : std::exp(-arg);
}

}  // namespace detail

/// Monte Carlo value under the domestic measure with continuously monitored barriers.
[[nodiscard]] inline McEstimate mc_price(const OptionSpec& s, double sigma, const MarketSnapshot& m,
                                         const McConfig& cfg = {}) {
    validate(s, m.spot);
    const int steps = detail::mc_steps(cfg, s.tau);
    const double dt = s.tau / steps;
    const double drift = (m.r_d - m.r_f - 0.5 * sigma * sigma) * dt;
    const double vol = sigma * std::sqrt(dt);
    const double var_dt = sigma * sigma * dt;
    const double x0 = std::log(m.spot);
    const bool has_lo = s.lower_barrier.has_value();
    const bool has_hi = s.upper_barrier.has_value();
    const double xl = has_lo ? std::log(s.L()) : 0.0;
    const double xh = has_hi ? std::log(s.H()) : 0.0;
    const double dfd = m.df_d(s.tau);
    const bool bridge = cfg.bridge_correction && sigma > 0.0;
    const double w = has_strike(s.kind) ? side_sign(payoff_side(s.kind)) : 0.0;
    const double K = has_strike(s.kind) ? s.K() : 0.0;

    auto eval = [&](const detail::PathDraws& d, double sign, std::vector<double>& out) {
        double x = x0;
        bool hit_lo = has_lo && x <= xl;
        bool hit_hi = has_hi && x >= xh;
        for (int i = 0; i < steps; ++i) {
            const double xn = x + drift + vol * sign * d.z[i];
            if (has_lo && !hit_lo) {
                hit_lo = xn <= xl || (bridge && d.u_lower[i] < detail::bridge_hit_probability(x, xn, xl, var_dt));
            }
            if (has_hi && !hit_hi) {
                hit_hi = xn >= xh || (bridge && d.u_upper[i] < detail::bridge_hit_probability(x, xn, xh, var_dt));
            }
            x = xn;
        }
        const double vanilla = std::max(w * (std::exp(x) - K), 0.0);
        const bool any = hit_lo || hit_hi;
        double v = 0.0;
        switch (s.kind) {
            case OptionKind::VanillaCall:
            case OptionKind::VanillaPut: v = vanilla; break;
            case OptionKind::UpOutCall:
            case OptionKind::DownOutCall:
            case OptionKind::UpOutPut:
            case OptionKind::DownOutPut:
            case OptionKind::DKOCall:
            case OptionKind::DKOPut: v = any ? 0.0 : vanilla; break;
            case OptionKind::UpInCall:
            case OptionKind::DownInCall:
            case OptionKind::UpInPut:
            case OptionKind::DownInPut:
            case OptionKind::DKICall:
            case OptionKind::DKIPut: v = any ? vanilla : 0.0; break;
            case OptionKind::KIKOCall:
            case OptionKind::KIKOPut: {
                const bool in = s.knock_in_barrier == BarrierSide::Lower ? hit_lo : hit_hi;
                const bool out_hit = s.knock_in_barrier == BarrierSide::Lower ? hit_hi : hit_lo;
                v = in && !out_hit ? vanilla : 0.0;
                break;
            }
            case OptionKind::OneTouch:
            case OptionKind::DoubleOneTouch: v = any ? 1.0 : 0.0; break;
            case OptionKind::NoTouch:
            case OptionKind::DoubleNoTouch: v = any ? 0.0 : 1.0; break;
        }
        out[0] = dfd * v;
    };
    return detail::run_mc(cfg, steps, 1, has_lo && bridge, has_hi && bridge, eval).front();
}

/// First exit statistics for several barrier sets simulated on one set of paths with drift
/// `mu`. A crossing inside a step is dated at the step midpoint.
[[nodiscard]] inline std::vector<ExitEstimate> mc_first_exit_ladder(const std::vector<Barriers>& ladder, double mu,
                                                                    double sigma, double spot, double tau,
                                                                    const McConfig& cfg = {}) {
    detail::require(spot > 0.0 && tau > 0.0 && sigma >= 0.0, "mc_first_exit: bad spot, tau or sigma");
    const int steps = detail::mc_steps(cfg, tau);
    const double dt = tau / steps;
    const double drift = (mu - 0.5 * sigma * sigma) * dt;
    const double vol = sigma * std::sqrt(dt);
    const double var_dt = sigma * sigma * dt;
    const double x0 = std::log(spot);
    const bool bridge = cfg.bridge_correction && sigma > 0.0;
    const std::size_t nb = ladder.size();
    std::vector<double> xl(nb), xh(nb);
    std::vector<char> has_lo(nb), has_hi(nb);
    bool any_lo = false;
    bool any_hi = false;
    for (std::size_t j = 0; j < nb; ++j) {
        has_lo[j] = ladder[j].lower.has_value();
        has_hi[j] = ladder[j].upper.has_value();
        if (has_lo[j]) xl[j] = std::log(*ladder[j].lower);
        if (has_hi[j]) xh[j] = std::log(*ladder[j].upper);
        any_lo = any_lo || has_lo[j];
        any_hi = any_hi || has_hi[j];
    }

    auto eval = [&](const detail::PathDraws& d, double sign, std::vector<double>& out) {
        thread_local std::vector<double> exit_step;
        exit_step.assign(nb, -1.0);
        std::size_t alive = 0;
        for (std::size_t j = 0; j < nb; ++j) {
            if ((has_lo[j] && x0 <= xl[j]) || (has_hi[j] && x0 >= xh[j])) {
                exit_step[j] = 0.0;
            } else if (has_lo[j] || has_hi[j]) {
                ++alive;
            }
        }
        double x = x0;
        for (int i = 0; i < steps && alive > 0; ++i) {
            const double xn = x + drift + vol * sign * d.z[i];
            for (std::size_t j = 0; j < nb; ++j) {
                if (exit_step[j] >= 0.0 || (!has_lo[j] && !has_hi[j])) continue;
                bool hit = false;
                if (has_lo[j]) {
                    hit = xn <= xl[j] ||
                          (bridge && d.u_lower[i] < detail::bridge_hit_probability(x, xn, xl[j], var_dt));
                }
                if (!hit && has_hi[j]) {
                    hit = xn >= xh[j] ||
                          (bridge && d.u_upper[i] < detail::bridge_hit_probability(x, xn, xh[j], var_dt));
                }
                if (hit) {
                    exit_step[j] = (i + 0.5) * dt;
                    --alive;
                }
            }
            x = xn;
        }
        for (std::size_t j = 0; j < nb; ++j) {
            const bool touched = exit_step[j] >= 0.0;
            out[2 * j] = touched ? exit_step[j] / tau : 1.0;
            out[2 * j + 1] = touched ? 1.0 : 0.0;
        }
    };
    const auto est = detail::run_mc(cfg, steps, 2 * nb, any_lo && bridge, any_hi && bridge, eval);
    std::vector<ExitEstimate> res(nb);
    for (std::size_t j = 0; j < nb; ++j) res[j] = {est[2 * j], est[2 * j + 1]};
    return res;
}

[[nodiscard]] inline ExitEstimate mc_first_exit(const Barriers& b, double mu, double sigma, double spot, double tau,
                                                const McConfig& cfg = {}) {
    return mc_first_exit_ladder({b}, mu, sigma, spot, tau, cfg).front();
}

}  // namespace vvfx
