#include "diswap/cli.hpp"

#include "diswap/claims.hpp"
#include "diswap/hedging.hpp"
#include "diswap/io.hpp"
#include "diswap/model_pricer.hpp"
#include "diswap/payoff_io.hpp"
#include "diswap/replication.hpp"
#include "diswap/swaps.hpp"
#include "diswap/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <tuple>

namespace diswap::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelFlags {
    std::string model = "gbm";
    double f0 = 100.0;
    double sigma = 0.2;
    double drift = 0.0;
    double maturity = 1.0;
    double jump_intensity = 1.0;
    double jump_mean = -0.1;
    double jump_sd = 0.15;
    double kappa = 1.5;
    double theta = 0.04;
    double xi = 0.5;
    double rho = -0.7;
    double v0 = 0.04;

    ModelSpec spec() const {
        ModelSpec m;
        m.kind = model_kind_from_string(model);
        m.F0 = f0;
        m.vol = sigma;
        m.drift = drift;
        if (m.kind == ModelKind::MertonJump) m.jump = JumpParams{jump_intensity, jump_mean, jump_sd};
        if (m.kind == ModelKind::Heston) m.heston = HestonParams{kappa, theta, xi, rho, v0};
        m.validate();
        return m;
    }
};

struct Options {
    std::string output_dir;
    unsigned threads = 0;
    std::string config;
    std::uint64_t seed = 0;
    std::string payoff;
    ModelFlags model;
    std::string partition;
    std::string partitions = "1,12,52,252,irregular:7";
    std::size_t paths = 0;
    CLI::Option* partition_opt = nullptr;
    CLI::Option* paths_opt = nullptr;
    double z = 4.0;
    int fine_factor = 64;
    std::string chain;
    double forward = 0.0;
    int strikes = 4096;
    double width = 10.0;
    std::string points = "grid";
    std::string mode = "analytic";
    double h = 1e-4;
    double tol = -1.0;
    std::string format = "csv";
    std::string instruments;
};

std::string output_path(const Options& o, const std::string& name) {
    return (std::filesystem::path(o.output_dir) / name).string();
}

void write_json(const Options& o, const std::string& name, const json& j) {
    write_file_atomic(output_path(o, name), j.dump(2) + "\n");
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}, {"n_paths", e.n_paths}}; }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

PayoffSpec payoff_flag(const Options& o) {
    try {
        return load_payoff(o.payoff);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--payoff: ") + e.what());
    }
}

ModelSpec model_flags(const Options& o) {
    try {
        return o.model.spec();
    } catch (const std::exception& e) {
        throw UsageError(std::string("--model: ") + e.what());
    }
}

Partition partition_flag(const std::string& flag, const std::string& value, double T) {
    try {
        return parse_partition(value, T);
    } catch (const std::exception& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

// Pay-off resolved against the model's time-0 state (for a moment swap without X0).
Characteristic resolve_with_model(const PayoffSpec& spec, const ModelSpec& model, double T) {
    return spec.resolve([&] { return ModelPricer(model, T, {"X"}).values(0.0, model.F0)[0]; });
}

DiPayoff require_di(const Characteristic& c, const std::string& command) {
    if (!std::holds_alternative<DiPayoff>(c))
        throw UsageError("--payoff: '" + command + "' needs a discretisation-invariant pay-off, not a classic one");
    return std::get<DiPayoff>(c);
}

void add_common(CLI::App* sub, Options& o, bool stochastic) {
    sub->add_option("--output-dir,-o", o.output_dir, "Directory for artifacts (default $DISWAP_OUTPUT_DIR or .)");
    sub->add_option("--config", o.config, "Flat key=value file; flags on the command line win");
    if (stochastic) {
        sub->add_option("--seed", o.seed, "Random seed")->required();
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it");
    }
}

CLI::Option* add_model(CLI::App* sub, Options& o, bool with_drift) {
    auto& m = o.model;
    auto* model_opt = sub->add_option("--model", m.model, "gbm, merton or heston")->capture_default_str();
    sub->add_option("--f0", m.f0, "Initial forward")->capture_default_str();
    sub->add_option("--sigma", m.sigma, "Volatility (gbm, merton, Black-76)")->capture_default_str();
    sub->add_option("--maturity,--tau", m.maturity, "Maturity in years")->capture_default_str();
    if (with_drift) sub->add_option("--drift", m.drift, "Physical drift of the forward")->capture_default_str();
    sub->add_option("--jump-intensity", m.jump_intensity, "Merton jump intensity")->capture_default_str();
    sub->add_option("--jump-mean", m.jump_mean, "Merton mean log jump")->capture_default_str();
    sub->add_option("--jump-sd", m.jump_sd, "Merton log jump sd")->capture_default_str();
    sub->add_option("--kappa", m.kappa, "Heston mean reversion")->capture_default_str();
    sub->add_option("--theta", m.theta, "Heston long-run variance")->capture_default_str();
    sub->add_option("--xi", m.xi, "Heston vol of variance")->capture_default_str();
    sub->add_option("--rho", m.rho, "Heston correlation")->capture_default_str();
    sub->add_option("--v0", m.v0, "Heston initial variance")->capture_default_str();
    return model_opt;
}

std::vector<ResidualPoint> residual_points(const Options& o, Eigen::Index d, bool seed_given) {
    if (o.points == "grid") {
        std::vector<ResidualPoint> points;
        for (double level : {0.5, 1.0, 2.0})
            for (double jump : {-0.25, 0.25})
                for (double ret : {-0.2, 0.1, 0.2}) {
                    ResidualPoint pt{Vector(d), Vector(d), Vector(d)};
                    for (Eigen::Index j = 0; j < d; ++j) {
                        pt.F[j] = level * (1.0 + 0.1 * static_cast<double>(j));
                        pt.F_hat[j] = jump * (1.0 - 0.05 * static_cast<double>(j));
                        pt.x_hat[j] = ret * (1.0 + 0.05 * static_cast<double>(j));
                    }
                    points.push_back(std::move(pt));
                }
        return points;
    }
    if (o.points.rfind("random:", 0) == 0) {
        if (!seed_given) throw UsageError("--seed: required with --points random:N");
        int n = 0;
        try {
            n = std::stoi(o.points.substr(7));
        } catch (const std::exception&) {
            throw UsageError("--points: expected grid or random:N");
        }
        if (n < 1) throw UsageError("--points: N must be positive");
        return random_points(d, static_cast<std::size_t>(n), o.seed);
    }
    throw UsageError("--points: expected grid or random:N");
}

int cmd_price(const Options& o, bool model_given) {
    const auto spec = payoff_flag(o);
    const auto labels = spec.labels();
    MarketState state;
    std::string source;
    std::function<double()> X0;
    if (!o.chain.empty()) {
        OptionChain chain;
        try {
            chain = read_chain_csv(o.chain, o.model.maturity, o.forward > 0.0 ? std::optional<double>(o.forward) : std::nullopt);
        } catch (const std::exception& e) {
            throw UsageError(std::string("--chain: ") + e.what());
        }
        X0 = [chain] { return power_log_price(chain, 1, std::log(chain.F)); };
        state = chain_state(chain, labels);
        source = "chain";
    } else if (model_given) {
        const auto model = model_flags(o);
        state = ModelPricer(model, o.model.maturity, labels).state(0.0, model.F0);
        X0 = [&] { return ModelPricer(model, o.model.maturity, {"X"}).values(0.0, model.F0)[0]; };
        source = "model:" + model.label();
    } else {
        OptionChain chain;
        try {
            const auto grid = default_grid(o.model.f0, o.model.sigma, o.model.maturity, o.strikes, o.width);
            auto strikes = grid.strikes();
            for (const auto& l : labels)
                if (const auto v = TerminalClaim::from_label(l).vanilla()) strikes.push_back(v->strike);
            std::sort(strikes.begin(), strikes.end());
            std::vector<double> unique;
            for (double k : strikes)
                if (unique.empty() || k > unique.back() * (1.0 + 1e-12)) unique.push_back(k);
            chain = black76_chain(o.model.f0, o.model.sigma, o.model.maturity, unique);
        } catch (const std::exception& e) {
            throw UsageError(std::string("Black-76 flags: ") + e.what());
        }
        X0 = [chain] { return power_log_price(chain, 1, std::log(chain.F)); };
        state = chain_state(chain, labels);
        source = "black76";
    }
    const auto payoff = require_di(spec.resolve(X0), "price");
    const auto fv = fair_value(payoff, state);
    json out = {{"payoff", to_json(payoff)},
                {"state_source", source},
                {"fair_value", fv.value},
                {"components", {{"quadratic_term", fv.quadratic_term}, {"log_term", fv.log_term}}}};
    write_json(o, "price.json", out);
    std::cout << "fair_value " << format_double(fv.value) << "\n";
    return kExitOk;
}

int cmd_hedge(const Options& o) {
    const auto model = model_flags(o);
    const double T = o.model.maturity;
    const auto payoff = require_di(resolve_with_model(payoff_flag(o), model, T), "hedge");
    const auto part = partition_flag("--partition", o.partition, T);
    const auto report = hedge_simulation(payoff, model, part, o.paths, o.seed, o.threads);
    const double tol = o.tol > 0.0 ? o.tol : 1e-10;

    std::string csv = "time,value,realised,implied,increment_mean,increment_se,residual";
    for (const auto& l : payoff.labels()) csv += ",units:" + l;
    csv += "\n";
    for (std::size_t i = 0; i < part.times.size(); ++i) {
        csv += format_double(part.times[i]) + "," + format_double(report.value_path[i]) + "," +
               format_double(report.realised[i]) + "," + format_double(report.implied[i]) + "," +
               format_double(report.increment_mean[i]) + "," + format_double(report.increment_se[i]) + "," +
               format_double(report.residual[i]);
        for (Eigen::Index j = 0; j < payoff.dim(); ++j)
            csv += "," + (i < report.hedge_positions.size() ? format_double(report.hedge_positions[i][j]) : std::string());
        csv += "\n";
    }
    write_file_atomic(output_path(o, "hedge.csv"), csv);
    const bool pass = report.max_step_error <= tol && report.max_terminal_error <= tol;
    json out = {{"payoff", to_json(payoff)},
                {"model", model.label()},
                {"partition", part.label},
                {"n_paths", report.n_paths},
                {"seed", o.seed},
                {"fair_value", report.v0},
                {"max_abs_residual", *std::max_element(report.residual.begin(), report.residual.end())},
                {"max_step_error", report.max_step_error},
                {"max_terminal_error", report.max_terminal_error},
                {"tolerance", tol},
                {"terminal_pnl", {{"mean", report.terminal_mean}, {"sd", report.terminal_sd}}},
                {"pass", pass}};
    write_json(o, "hedge.json", out);
    std::cout << "hedge max_step_error " << format_double(report.max_step_error) << (pass ? " pass" : " FAIL") << "\n";
    return pass ? kExitOk : kExitVerificationFailed;
}

int cmd_verify_ap(const Options& o) {
    const auto model = model_flags(o);
    const double T = o.model.maturity;
    const auto payoff = resolve_with_model(payoff_flag(o), model, T);
    std::vector<Partition> parts;
    for (const auto& s : split(o.partitions, ',')) parts.push_back(partition_flag("--partitions", s, T));
    if (parts.empty()) throw UsageError("--partitions: no partitions given");
    if (!(o.z > 0.0)) throw UsageError("--z: threshold must be positive");
    const auto v = ap_check(payoff, model, parts, o.paths, o.seed, o.z, o.threads);

    json rows = json::array();
    std::cout << "partition            leg_mean        leg_se          diff_mean       diff_se         z\n";
    for (const auto& p : v.partitions) {
        rows.push_back({{"label", p.label}, {"leg", estimate_json(p.leg)}, {"difference", estimate_json(p.difference)},
                        {"z", std::isfinite(p.z) ? json(p.z) : json("inf")}});
        char line[200];
        std::snprintf(line, sizeof(line), "%-20s %-15.8g %-15.8g %-15.8g %-15.8g %.3f\n", p.label.c_str(), p.leg.mean,
                      p.leg.se, p.difference.mean, p.difference.se, p.z);
        std::cout << line;
    }
    json out = {{"payoff", v.payoff_label},
                {"model", v.model_label},
                {"seed", o.seed},
                {"reference", estimate_json(v.reference)},
                {"partitions", rows},
                {"max_abs_z", std::isfinite(v.max_abs_z) ? json(v.max_abs_z) : json("inf")},
                {"z_threshold", v.z_threshold},
                {"dual_form_max_error", v.dual_form_max_error},
                {"dual_form_steps", v.dual_form_steps},
                {"pass", v.pass}};
    if (const auto* di = std::get_if<DiPayoff>(&payoff)) out["payoff_coefficients"] = to_json(*di);
    write_json(o, "verify_ap.json", out);
    std::cout << "verify-ap max|z| " << v.max_abs_z << (v.pass ? " pass" : " FAIL") << "\n";
    return v.pass ? kExitOk : kExitVerificationFailed;
}

int cmd_residual(const Options& o, bool seed_given) {
    const auto spec = payoff_flag(o);
    const bool fd = o.mode == "fd";
    if (!fd && o.mode != "analytic") throw UsageError("--mode: expected analytic or fd");
    if (spec.kind == PayoffSpec::Kind::Moment && !spec.moment_X0)
        throw UsageError("--payoff: residual needs an explicit moment X0");
    const auto payoff = spec.resolve([] { return 0.0; });
    const auto* di = std::get_if<DiPayoff>(&payoff);
    const Eigen::Index d = di ? di->dim() : 1;
    const auto points = residual_points(o, d, seed_given);
    ResidualReport report;
    json study;
    if (fd) {
        const Candidate phi = di ? as_candidate(*di) : as_candidate(std::get<ClassicPayoff>(payoff).kind);
        report = pde_residual_fd(phi, d, points, o.h);
        const auto conv = fd_convergence(phi, d, points);
        study = {{"h", conv.h}, {"max_norm", conv.max_norm}, {"order", conv.order}, {"constant", conv.constant}};
    } else {
        report = di ? pde_residual(*di, points) : pde_residual(std::get<ClassicPayoff>(payoff).kind, points);
    }
    const double tol = o.tol > 0.0 ? o.tol : (fd ? 1e-6 : 1e-10);
    json residuals = json::array();
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const auto& pt = report.points[i];
        const auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
        json matrix = json::array();
        for (Eigen::Index r = 0; r < report.residuals[i].rows(); ++r) matrix.push_back(vec(report.residuals[i].row(r).transpose()));
        residuals.push_back({{"F_hat", vec(pt.F_hat)}, {"x_hat", vec(pt.x_hat)}, {"F", vec(pt.F)}, {"residual", matrix},
                             {"norm", report.residuals[i].norm()}});
    }
    const bool pass = report.max_norm <= tol;
    json out = {{"payoff", describe(payoff)},
                {"mode", fd ? "finite-difference" : "analytic"},
                {"points", residuals},
                {"max_norm", report.max_norm},
                {"tolerance", tol},
                {"pass", pass}};
    if (fd) {
        out["h"] = report.h;
        out["convergence"] = study;
    }
    write_json(o, "residual.json", out);
    std::cout << "residual max_norm " << format_double(report.max_norm) << (pass ? " pass" : " FAIL") << "\n";
    return pass ? kExitOk : kExitVerificationFailed;
}

int cmd_delta(const Options& o) {
    const auto model = model_flags(o);
    const double T = o.model.maturity;
    const auto payoff = resolve_with_model(payoff_flag(o), model, T);
    const auto part = partition_flag("--partition", o.partition, T);
    if (o.fine_factor < 2) throw UsageError("--fine-factor: must be at least 2");
    const auto r = delta_n(payoff, model, part, o.paths, o.fine_factor, o.seed, o.threads);
    json out = {{"payoff", describe(payoff)},    {"model", model.label()},          {"partition", part.label},
                {"seed", o.seed},                {"fine_factor", r.fine_factor},    {"delta", estimate_json(r.delta)},
                {"coarse", estimate_json(r.coarse)}, {"fine", estimate_json(r.fine)}};
    write_json(o, "delta.json", out);
    std::cout << "delta " << format_double(r.delta.mean) << " se " << format_double(r.delta.se) << "\n";
    return kExitOk;
}

int cmd_premium(const Options& o) {
    const auto model = model_flags(o);
    const double T = o.model.maturity;
    const auto payoff = resolve_with_model(payoff_flag(o), model, T);
    const auto part = partition_flag("--partition", o.partition, T);
    const auto r = premium_study(payoff, model, part, o.paths, o.seed, o.threads);
    json out = {{"payoff", describe(payoff)},
                {"model", model.label()},
                {"partition", part.label},
                {"seed", o.seed},
                {"method", r.method},
                {"realised", estimate_json(r.realised)},
                {"realised_variance", r.realised_variance},
                {"fair_value", r.fair_value},
                {"fair_value_se", r.fair_value_se},
                {"premium", r.premium},
                {"premium_se", r.premium_se}};
    write_json(o, "premium.json", out);
    if (!r.realised_series.empty()) {
        std::string csv = "time,realised,implied\n";
        for (std::size_t i = 0; i < r.times.size(); ++i)
            csv += format_double(r.times[i]) + "," + format_double(r.realised_series[i]) + "," +
                   format_double(r.implied_series[i]) + "\n";
        write_file_atomic(output_path(o, "premium.csv"), csv);
    }
    std::cout << "premium " << format_double(r.premium) << " se " << format_double(r.premium_se) << "\n";
    return kExitOk;
}

int cmd_chain_gen(const Options& o) {
    OptionChain chain;
    try {
        const auto grid = default_grid(o.model.f0, o.model.sigma, o.model.maturity, o.strikes, o.width);
        chain = black76_chain(o.model.f0, o.model.sigma, o.model.maturity, grid.strikes());
    } catch (const std::exception& e) {
        throw UsageError(std::string("Black-76 flags: ") + e.what());
    }
    write_file_atomic(output_path(o, "chain.csv"), chain_csv(chain));
    std::cout << "chain " << chain.size() << " strikes from " << format_double(chain.strikes.front()) << " to "
              << format_double(chain.strikes.back()) << "\n";
    return kExitOk;
}

int cmd_simulate(const Options& o) {
    const auto model = model_flags(o);
    const double T = o.model.maturity;
    const auto part = partition_flag("--partition", o.partition, T);
    auto panel = simulate_paths(model, part, o.paths, o.seed, o.threads);
    const auto labels = split(o.instruments, ',');
    if (!labels.empty()) {
        const ModelPricer pricer(model, T, labels);
        panel.aux_labels = labels;
        const auto nt = panel.n_times();
        panel.aux.resize(panel.n_paths * nt * labels.size());
        parallel_for(panel.n_paths, o.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p)
                for (std::size_t t = 0; t < nt; ++t)
                    pricer.values(part.times[t], panel.forward(p, t),
                                  panel.variance.empty() ? ModelPricer::kNoVariance : panel.variance[p * nt + t],
                                  panel.aux.data() + (p * nt + t) * labels.size());
        });
    }
    if (o.format == "csv") write_panel_csv(panel, output_path(o, "panel.csv"));
    else if (o.format == "binary") write_panel_binary(panel, output_path(o, "panel.bin"));
    else throw UsageError("--format: expected csv or binary");
    std::cout << "simulated " << panel.n_paths << " paths on " << panel.n_times() << " times\n";
    return kExitOk;
}

// Appends key=value pairs from the --config file for every flag not already given.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
    }
    if (config.empty()) return args;
    std::string text;
    try {
        text = read_file(config);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--config: ") + e.what());
    }
    std::vector<std::string> out = args;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("--config: expected key=value, got '" + line + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        while (!key.empty() && key[0] == '-') key.erase(0, 1);
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (!given) out.push_back(flag + "=" + value);
    }
    return out;
}

} // namespace

int run(const std::vector<std::string>& raw_args) {
    Options o;
    if (const char* dir = std::getenv("DISWAP_OUTPUT_DIR")) o.output_dir = dir;
    if (o.output_dir.empty()) o.output_dir = ".";

    CLI::App app{"Discretisation-invariant swap pricing, hedging and verification"};
    app.require_subcommand(1);
    std::vector<std::tuple<CLI::App*, CLI::Option*, std::string>> partitions_for;
    std::vector<std::tuple<CLI::App*, CLI::Option*, std::size_t>> paths_for;

    auto* price = app.add_subcommand("price", "Fair value of a pay-off from an option chain or a model");
    add_common(price, o, false);
    auto* price_model = add_model(price, o, false);
    price->add_option("--payoff", o.payoff, "Pay-off JSON file or inline JSON")->required();
    price->add_option("--chain", o.chain, "Option chain CSV (strike,put,call)");
    price->add_option("--forward", o.forward, "Forward for --chain (default: implied by put-call parity)");
    price->add_option("--strikes", o.strikes, "Black-76 strike count")->capture_default_str();
    price->add_option("--width", o.width, "Black-76 grid half-width in sigma sqrt(T)")->capture_default_str();

    auto* hedge = app.add_subcommand("hedge", "Simulate the replicating portfolio of a swap");
    add_common(hedge, o, true);
    add_model(hedge, o, false);
    hedge->add_option("--payoff", o.payoff, "Pay-off JSON file or inline JSON")->required();
    partitions_for.emplace_back(hedge, hedge->add_option("--partition", o.partition, "Monitoring partition (default daily)"), "daily");
    paths_for.emplace_back(hedge, hedge->add_option("--paths", o.paths, "Number of paths (default 1000)"), 1000);
    hedge->add_option("--tol", o.tol, "Tolerance on the per-step hedge error (default 1e-10)");

    auto* verify = app.add_subcommand("verify-ap", "Monte Carlo check of the aggregation property");
    add_common(verify, o, true);
    add_model(verify, o, false);
    verify->add_option("--payoff", o.payoff, "Pay-off JSON file or inline JSON")->required();
    verify->add_option("--partitions", o.partitions, "Comma-separated partitions")->capture_default_str();
    paths_for.emplace_back(verify, verify->add_option("--paths", o.paths, "Number of paths (default 100000)"), 100000);
    verify->add_option("--z", o.z, "z-score threshold")->capture_default_str();

    auto* residual = app.add_subcommand("residual", "PDE residual of a candidate pay-off");
    add_common(residual, o, false);
    auto* residual_seed = residual->add_option("--seed", o.seed, "Seed for random points");
    residual->add_option("--payoff", o.payoff, "Pay-off JSON file or inline JSON")->required();
    residual->add_option("--points", o.points, "grid or random:N")->capture_default_str();
    residual->add_option("--mode", o.mode, "analytic or fd")->capture_default_str();
    residual->add_option("--step", o.h, "Finite-difference step")->capture_default_str();
    residual->add_option("--tol", o.tol, "Pass tolerance on the max residual norm (default 1e-10 analytic, 1e-6 fd)");

    auto* delta = app.add_subcommand("delta", "Discrete-monitoring error against a refined partition");
    add_common(delta, o, true);
    add_model(delta, o, false);
    delta->add_option("--payoff", o.payoff, "Pay-off JSON file or inline JSON")->required();
    partitions_for.emplace_back(delta, delta->add_option("--partition", o.partition, "Monitoring partition (default 1)"), "1");
    paths_for.emplace_back(delta, delta->add_option("--paths", o.paths, "Number of paths (default 100000)"), 100000);
    delta->add_option("--fine-factor", o.fine_factor, "Refinement factor")->capture_default_str();

    auto* premium = app.add_subcommand("premium", "Realised leg under a physical drift against the fair value");
    add_common(premium, o, true);
    add_model(premium, o, true);
    premium->add_option("--payoff", o.payoff, "Pay-off JSON file or inline JSON")->required();
    partitions_for.emplace_back(premium, premium->add_option("--partition", o.partition, "Monitoring partition (default monthly)"), "monthly");
    paths_for.emplace_back(premium, premium->add_option("--paths", o.paths, "Number of paths (default 100000)"), 100000);

    auto* chain_gen = app.add_subcommand("chain-gen", "Write a Black-76 option chain");
    add_common(chain_gen, o, false);
    chain_gen->add_option("--f0", o.model.f0, "Forward")->capture_default_str();
    chain_gen->add_option("--sigma", o.model.sigma, "Volatility")->capture_default_str();
    chain_gen->add_option("--tau,--maturity", o.model.maturity, "Time to maturity")->capture_default_str();
    chain_gen->add_option("--strikes", o.strikes, "Strike count")->capture_default_str();
    chain_gen->add_option("--width", o.width, "Grid half-width in sigma sqrt(T)")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Export simulated paths");
    add_common(simulate, o, true);
    add_model(simulate, o, true);
    partitions_for.emplace_back(simulate, simulate->add_option("--partition", o.partition, "Monitoring partition (default daily)"), "daily");
    paths_for.emplace_back(simulate, simulate->add_option("--paths", o.paths, "Number of paths (default 100)"), 100);
    simulate->add_option("--format", o.format, "csv or binary")->capture_default_str();
    simulate->add_option("--instruments", o.instruments, "Comma-separated instruments to value along the paths");

    try {
        const auto args = merge_config(raw_args);
        std::vector<std::string> storage{"diswap"};
        storage.insert(storage.end(), args.begin(), args.end());
        std::vector<char*> argv;
        for (auto& s : storage) argv.push_back(s.data());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? kExitOk : kExitError;
        }
        for (const auto& [sub, opt, def] : partitions_for)
            if (sub->parsed() && opt->count() == 0) o.partition = def;
        for (const auto& [sub, opt, def] : paths_for)
            if (sub->parsed() && opt->count() == 0) o.paths = def;
        if (o.paths == 0 && !price->parsed() && !residual->parsed() && !chain_gen->parsed())
            throw UsageError("--paths: must be at least 1");
        if (price->parsed()) return cmd_price(o, price_model->count() > 0);
        if (hedge->parsed()) return cmd_hedge(o);
        if (verify->parsed()) return cmd_verify_ap(o);
        if (residual->parsed()) return cmd_residual(o, residual_seed->count() > 0);
        if (delta->parsed()) return cmd_delta(o);
        if (premium->parsed()) return cmd_premium(o);
        if (chain_gen->parsed()) return cmd_chain_gen(o);
        if (simulate->parsed()) return cmd_simulate(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace diswap::cli
