// vvfx: command-line front end for the vanna-volga FX pricer.
//
//   vvfx price     --snapshot s.json --instrument i.json [--params p.json]
//   vvfx smile     --snapshot s.json
//   vvfx sweep     --snapshot s.json --config sweep.json
//   vvfx calibrate --snapshot s.json --quotes q.json --config fit.json [--out params.json]
//   vvfx verify    [--snapshot s.json] [--config mc.json] [--seed N]
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vvfx/calibration.hpp"
#include "vvfx/io.hpp"
#include "vvfx/sweep.hpp"
#include "vvfx/vanna_volga.hpp"
#include "verify.hpp"

namespace {

using vvfx::io::json;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string snapshot;
    std::string instrument;
    std::string params;
    std::string config;
    std::string quotes;
    std::string out;
    std::string format = "json";
    std::size_t tenor = 0;
    std::uint64_t seed = 42;
    bool seed_set = false;
    std::vector<double> strikes;
};

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); }

void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw vvfx::ValidationError("cannot write '" + o.out + "'");
    f << text;
}

vvfx::io::ParamsFile load_params(const Options& o) {
    if (o.params.empty()) return {};
    return vvfx::io::params_file_from_json(vvfx::io::load_file(o.params));
}

int cmd_price(const Options& o) {
    const auto snap = vvfx::io::snapshot_from_json(vvfx::io::load_file(o.snapshot));
    const auto specs = vvfx::io::instruments_from_json(vvfx::io::load_file(o.instrument), snap.market.spot);
    const auto pf = load_params(o);
    const auto curve = vvfx::io::smile_for(snap, o.tenor);
    const vvfx::VannaVolgaPricer pricer(curve, pf.params, pf.grid);
    const double spot = snap.market.spot;

    std::ostringstream os;
    if (o.format == "csv") {
        os << "kind,strike,lower_barrier,upper_barrier,tau,gamma,p_vanna,p_volga,bstv_pct,vanna_term_pct,"
              "volga_term_pct,vega_term_pct,final_pct,smile_value_pct,flags\n";
        for (const auto& s : specs) {
            const auto r = pricer.price(s);
            auto pct = [&](double v) { return fixed6(vvfx::io::percent_of_notional(v, s, spot)); };
            std::string flags;
            for (const auto& f : vvfx::io::flag_names(r.flags)) flags += (flags.empty() ? "" : "|") + f;
            os << vvfx::to_string(s.kind) << ',' << opt_num(s.strike) << ',' << opt_num(s.lower_barrier) << ','
               << opt_num(s.upper_barrier) << ',' << fixed6(s.tau) << ',' << fixed6(r.gamma) << ','
               << fixed6(r.p_vanna) << ',' << fixed6(r.p_volga) << ',' << pct(r.bstv) << ',' << pct(r.vanna_term)
               << ',' << pct(r.volga_term) << ',' << pct(r.vega_term) << ',' << pct(r.final_price) << ','
               << pct(r.final_price - r.bstv) << ',' << flags << '\n';
        }
    } else {
        json results = json::array();
        for (const auto& s : specs) results.push_back(vvfx::io::to_json(pricer.price(s), s, spot));
        const json doc = specs.size() == 1 ? results.front()
                                           : json{{"schema_version", vvfx::io::kSchemaVersion}, {"results", results}};
        os << doc.dump(2) << '\n';
    }
    emit(o, os.str());
    return 0;
}

int cmd_smile(const Options& o) {
    const auto snap = vvfx::io::snapshot_from_json(vvfx::io::load_file(o.snapshot));
    const auto curve = vvfx::io::smile_for(snap, o.tenor);
    const auto bf1 = vvfx::bf1vol_from_curve(curve);
    const auto hedges = vvfx::build_hedge_set(curve);
    const auto omega = vvfx::market_greek_prices(hedges);
    std::vector<double> strikes = o.strikes;
    if (strikes.empty()) {
        const double lo = curve.pillars()[0].strike;
        const double hi = curve.pillars()[2].strike;
        for (int i = 0; i <= 10; ++i) strikes.push_back(lo * std::pow(hi / lo, i / 10.0));
    }
    std::ostringstream os;
    if (o.format == "csv") {
        os << "strike,vol\n";
        for (double k : strikes) os << fixed6(k) << ',' << fixed6(curve.vol_at_strike(k)) << '\n';
    } else {
        json pillars = json::array();
        for (const auto& p : curve.pillars()) pillars.push_back({{"strike", p.strike}, {"vol", p.vol}});
        json grid = json::array();
        for (double k : strikes) grid.push_back({{"strike", k}, {"vol", curve.vol_at_strike(k)}});
        const json doc = {{"schema_version", vvfx::io::kSchemaVersion},
                          {"pair", snap.pair},
                          {"tau", curve.tau()},
                          {"pillars", pillars},
                          {"sigma_rr25", curve.sigma_rr25()},
                          {"sigma_bf25_2vol", curve.sigma_bf25_2vol()},
                          {"sigma_bf25_1vol", bf1.sigma_bf25_1vol},
                          {"broker_strikes", {{"put", bf1.k_put}, {"call", bf1.k_call}}},
                          {"vega_weighted_strangle", vvfx::vega_weighted_strangle(curve)},
                          {"hedge_strikes", {{"put", hedges.k_put}, {"atm", hedges.k_atm}, {"call", hedges.k_call}}},
                          {"rr_cost", hedges.rr_cost},
                          {"bf_cost", hedges.bf_cost},
                          {"greek_prices", {{"vega", omega.vega}, {"vanna", omega.vanna}, {"volga", omega.volga}}},
                          {"vols", grid}};
        os << doc.dump(2) << '\n';
    }
    emit(o, os.str());
    return 0;
}

int cmd_sweep(const Options& o) {
    const auto snap = vvfx::io::snapshot_from_json(vvfx::io::load_file(o.snapshot));
    if (o.config.empty()) throw vvfx::ValidationError("sweep: --config <sweep spec> is required");
    const auto spec = vvfx::sweep_spec_from_json(vvfx::io::load_file(o.config), snap.market.spot);
    const auto curve = vvfx::io::smile_for(snap, o.tenor);
    const auto rows = vvfx::run_sweep(spec, curve);
    const double spot = snap.market.spot;
    auto pct = [&](double v) { return vvfx::io::percent_of_notional(v, spec.instrument, spot); };

    std::ostringstream os;
    if (o.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json row = {{"barrier", r.barrier}, {"bstv_pct", pct(r.bstv)}};
            if (r.target) row["touch_probability"] = *r.target;
            if (!r.error.empty()) row["error"] = r.error;
            for (std::size_t i = 0; i < r.prices.size(); ++i) {
                row[spec.models[i].name + "_pct"] = pct(r.prices[i]);
                row[spec.models[i].name + "_modsv_pct"] = pct(r.prices[i] - r.bstv);
            }
            arr.push_back(row);
        }
        os << json{{"schema_version", vvfx::io::kSchemaVersion}, {"rows", arr}}.dump(2) << '\n';
    } else {
        os << "barrier,touch_probability,bstv_pct";
        for (const auto& mdl : spec.models) os << ',' << mdl.name << "_pct," << mdl.name << "_modsv_pct";
        os << ",error\n";
        for (const auto& r : rows) {
            os << fixed6(r.barrier) << ',' << opt_num(r.target) << ',';
            if (r.error.empty()) {
                os << fixed6(pct(r.bstv));
                for (double p : r.prices) os << ',' << fixed6(pct(p)) << ',' << fixed6(pct(p - r.bstv));
                os << ",\n";
            } else {
                os << "NA";
                for (std::size_t i = 0; i < spec.models.size(); ++i) os << ",NA,NA";
                std::string msg = r.error;
                for (char& c : msg) if (c == ',' || c == '\n') c = ' ';
                os << ',' << msg << '\n';
            }
        }
    }
    emit(o, os.str());
    return 0;
}

int cmd_calibrate(const Options& o) {
    const auto snap = vvfx::io::snapshot_from_json(vvfx::io::load_file(o.snapshot));
    if (o.quotes.empty()) throw vvfx::ValidationError("calibrate: --quotes is required");
    const auto quotes = vvfx::io::quotes_from_json(vvfx::io::load_file(o.quotes), snap.market.spot);
    const vvfx::FitConfig cfg =
        o.config.empty() ? vvfx::FitConfig{} : vvfx::io::fit_config_from_json(vvfx::io::load_file(o.config));
    const auto pf = load_params(o);
    const auto curve = vvfx::io::smile_for(snap, o.tenor);
    const auto res = vvfx::fit(quotes, cfg, curve, pf.grid);

    json doc = vvfx::io::to_json(res.params);
    doc["schema_version"] = vvfx::io::kSchemaVersion;
    doc["grid"] = vvfx::io::to_json(pf.grid);
    doc["provenance"] = {{"config", std::string(vvfx::to_string(cfg.constraint))},
                         {"instrument_count", res.instruments},
                         {"epsilon", res.epsilon},
                         {"epsilon_clamped", res.epsilon_clamped},
                         {"regularized", res.regularized},
                         {"snapshot", o.snapshot},
                         {"quotes", o.quotes}};
    const std::string text = doc.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        emit(o, text);
        std::cout << "config " << vvfx::to_string(cfg.constraint) << ": a=" << res.params.a << " b=" << res.params.b
                  << " c=" << res.params.c << " instruments=" << res.instruments << " epsilon=" << res.epsilon
                  << '\n';
    }
    return 0;
}

int cmd_verify(const Options& o) {
    vvfx::tools::VerifyInputs in;
    if (!o.snapshot.empty()) {
        const auto snap = vvfx::io::snapshot_from_json(vvfx::io::load_file(o.snapshot));
        in.market = snap.market;
        in.sigma = snap.tenor(o.tenor).sigma_atm;
        in.tau = snap.tenor(o.tenor).tau;
    }
    if (!o.config.empty()) in.mc = vvfx::io::mc_config_from_json(vvfx::io::load_file(o.config));
    if (o.seed_set) in.mc.seed = o.seed;
    const auto report = vvfx::tools::run_verify(in);
    std::ostringstream os;
    vvfx::tools::print_report(os, report);
    emit(o, os.str());
    return report.all_pass() ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vanna-volga pricing of FX first-generation exotics"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* c, bool snapshot_required) {
        auto* opt = c->add_option("--snapshot", o.snapshot, "market snapshot JSON");
        if (snapshot_required) opt->required();
        c->add_option("--tenor", o.tenor, "tenor index in the snapshot")->default_val(0);
        c->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
        c->add_option("--out", o.out, "write output to this file instead of stdout");
    };

    auto* price = app.add_subcommand("price", "price instruments with the attenuated vanna-volga method");
    add_common(price, true);
    price->add_option("--instrument", o.instrument, "instrument JSON")->required();
    price->add_option("--params", o.params, "VV parameter JSON");

    auto* smile = app.add_subcommand("smile", "inspect the smile built from a snapshot tenor");
    add_common(smile, true);
    smile->add_option("--strikes", o.strikes, "strikes to evaluate")->delimiter(',');

    auto* sweep = app.add_subcommand("sweep", "barrier-ladder table of BSTV and VV prices");
    add_common(sweep, true);
    sweep->add_option("--config", o.config, "sweep specification JSON")->required();

    auto* calibrate = app.add_subcommand("calibrate", "fit attenuation coefficients to quotes");
    add_common(calibrate, true);
    calibrate->add_option("--quotes", o.quotes, "quote set JSON")->required();
    calibrate->add_option("--config", o.config, "fit configuration JSON");
    calibrate->add_option("--params", o.params, "params JSON supplying the PDE grid");

    auto* verify = app.add_subcommand("verify", "check closed forms against the Monte Carlo oracle");
    add_common(verify, false);
    verify->add_option("--config", o.config, "Monte Carlo configuration JSON");
    verify->add_option("--seed", o.seed, "random seed")->each([&](const std::string&) { o.seed_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInvalid;
    }
    if (sweep->parsed() && sweep->count("--format") == 0) o.format = "csv";

    try {
        if (price->parsed()) return cmd_price(o);
        if (smile->parsed()) return cmd_smile(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (calibrate->parsed()) return cmd_calibrate(o);
        if (verify->parsed()) return cmd_verify(o);
    } catch (const vvfx::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const vvfx::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const vvfx::io::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitInvalid;
}
