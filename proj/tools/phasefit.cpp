// phasefit: regime queries, entropy reports, single KRR fits, Monte Carlo
// experiment sweeps and rate-slope checks for the Sobolev-kernel regression
// toolkit. Exit codes: 0 success, 1 computation failure, 2 usage/config.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phasefit/complexity.hpp"
#include "phasefit/config_json.hpp"
#include "phasefit/entropy.hpp"
#include "phasefit/kernels.hpp"
#include "phasefit/krr.hpp"
#include "phasefit/regime.hpp"
#include "phasefit/sim.hpp"

namespace {

using nlohmann::json;
namespace pf = phasefit;

pf::entropy::RadiusProfile parse_profile(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (name == "constant") return pf::entropy::RadiusProfile::constant(arg.empty() ? 1.0 : std::stod(arg));
    if (name == "factorial")
        return pf::entropy::RadiusProfile::factorial(arg.empty() ? 1.0 : std::stod(arg));
    if (name == "factorial-minus-one")
        return pf::entropy::RadiusProfile::factorial_minus_one(arg.empty() ? 1.0 : std::stod(arg));
    if (name == "explicit") {
        std::vector<double> vals;
        std::stringstream ss(arg);
        std::string item;
        while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
        return pf::entropy::RadiusProfile::explicit_values(std::move(vals));
    }
    throw CLI::ValidationError("--profile", "expected constant:C | factorial:C | "
                                            "factorial-minus-one:C | explicit:r0,r1,...");
}

json regime_to_json(const pf::regime::RegimeReport& rep) {
    json j{{"n", rep.n},
           {"sigma_sq", rep.sigma_sq},
           {"gamma_star", rep.gamma_star},
           {"regime", pf::regime::regime_name(rep.regime)},
           {"recommended_degree", rep.recommended_degree},
           {"predicted_rate", rep.predicted_rate},
           {"rate_formula", rep.rate_formula}};
    if (rep.gamma) j["gamma"] = *rep.gamma;
    return j;
}

int default_threads() {
    if (const char* env = std::getenv("PHASEFIT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

// --- regime ---------------------------------------------------------------

struct RegimeArgs {
    long long n = 0;
    double sigma = 1.0;
    int gamma = -1;
    bool analytic = false;
    std::string class_name = "sobolev";
    std::string profile = "constant:1";
    int d = 0;
    bool as_json = false;
};

int run_regime(const RegimeArgs& a) {
    pf::regime::RegimeReport rep;
    if (a.analytic) {
        rep = pf::regime::classify_analytic(a.n, a.sigma * a.sigma);
    } else {
        if (a.gamma < 0) throw CLI::ValidationError("--gamma", "required unless --analytic");
        pf::entropy::ClassKind kind = pf::entropy::ClassKind::Sobolev;
        if (a.class_name == "holder") kind = pf::entropy::ClassKind::HolderFull;
        else if (a.class_name == "sobolev") kind = pf::entropy::ClassKind::Sobolev;
        else if (a.class_name == "poly-sub") kind = pf::entropy::ClassKind::PolySub;
        else if (a.class_name == "holder-sub") kind = pf::entropy::ClassKind::HolderSub;
        else if (a.class_name == "ellipsoid") kind = pf::entropy::ClassKind::Ellipsoid;
        else throw CLI::ValidationError("--class", "unknown class '" + a.class_name + "'");
        rep = pf::regime::classify(a.n, a.sigma * a.sigma, a.gamma, kind, parse_profile(a.profile));
    }
    json j = regime_to_json(rep);
    if (a.d >= 1 && a.gamma >= 0) {
        const auto mv = pf::regime::multivariate_threshold(a.n, a.sigma * a.sigma, a.gamma, a.d);
        j["multivariate"] = {{"d", a.d},
                             {"small_n", mv.small_n},
                             {"log_threshold", mv.log_threshold}};
    }
    if (a.as_json) {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "regime: " << j["regime"].get<std::string>() << "\n";
    if (j.contains("gamma")) std::cout << "gamma: " << j["gamma"].get<int>() << "\n";
    std::cout << "gamma_star: " << j["gamma_star"].get<int>() << "\n"
              << "recommended_degree: " << j["recommended_degree"].get<int>() << "\n"
              << "predicted_rate: " << pf::sim::format_g17(j["predicted_rate"].get<double>())
              << "  (" << j["rate_formula"].get<std::string>() << ")\n";
    if (j.contains("multivariate"))
        std::cout << "multivariate(d=" << j["multivariate"]["d"].get<int>()
                  << "): small_n=" << (j["multivariate"]["small_n"].get<bool>() ? "yes" : "no")
                  << " log_threshold="
                  << pf::sim::format_g17(j["multivariate"]["log_threshold"].get<double>()) << "\n";
    return 0;
}

// --- entropy ----------------------------------------------------------------

struct EntropyArgs {
    std::string class_name = "poly-sub";
    int gamma = 0;
    std::string profile = "constant:1";
    std::vector<double> deltas;
    std::string delta_grid;  // min:max:count (geometric)
    int d = 1;
    std::string out_path;
};

int run_entropy(const EntropyArgs& a) {
    std::vector<double> deltas = a.deltas;
    if (!a.delta_grid.empty()) {
        double lo, hi;
        int count;
        if (std::sscanf(a.delta_grid.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 1 ||
            lo <= 0 || hi <= 0)
            throw CLI::ValidationError("--delta-grid", "expected min:max:count");
        for (int i = 0; i < count; ++i) {
            const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            deltas.push_back(lo * std::pow(hi / lo, t));
        }
    }
    if (deltas.empty()) throw CLI::ValidationError("--delta", "need at least one delta");

    const auto profile = parse_profile(a.profile);
    std::string csv = "delta,lower_log,upper_log,branch\n";
    for (double delta : deltas) {
        pf::entropy::EntropyBoundReport rep;
        if (a.class_name == "poly-sub") {
            const auto spec = pf::entropy::SmoothnessClassSpec::make(
                pf::entropy::ClassKind::PolySub, a.gamma, profile);
            const auto cover = pf::entropy::poly_cover_upper(spec, delta);
            rep.delta = delta;
            rep.upper_log = cover.value;
            rep.branch = cover.branch;
            double lower = -std::numeric_limits<double>::infinity();
            if (auto b1 = pf::entropy::poly_pack_lower_B1(spec, delta)) lower = *b1;
            if (auto f = pf::entropy::poly_pack_B2_feasible(spec, delta); f.feasible)
                lower = std::max(lower, f.log_lower);
            rep.lower_log = lower;
        } else if (a.class_name == "holder-sub") {
            rep = pf::entropy::holder_sub_entropy(
                pf::entropy::SmoothnessClassSpec::make(pf::entropy::ClassKind::HolderSub, a.gamma,
                                                       profile),
                delta);
        } else if (a.class_name == "ellipsoid") {
            rep = pf::entropy::ellipsoid_entropy(
                pf::entropy::SmoothnessClassSpec::make(pf::entropy::ClassKind::Ellipsoid, a.gamma,
                                                       profile),
                delta);
        } else if (a.class_name == "holder-full") {
            rep = pf::entropy::full_holder_entropy(
                pf::entropy::SmoothnessClassSpec::make(pf::entropy::ClassKind::HolderFull, a.gamma,
                                                       profile),
                delta);
        } else if (a.class_name == "poly-sub-d" || a.class_name == "holder-sub-d") {
            const auto sub = a.class_name == "poly-sub-d"
                                 ? pf::entropy::MultivariateSub::PolySubD
                                 : pf::entropy::MultivariateSub::HolderSubD;
            const auto kind = a.class_name == "poly-sub-d" ? pf::entropy::ClassKind::PolySub
                                                           : pf::entropy::ClassKind::HolderSub;
            rep = pf::entropy::multivariate_entropy(
                pf::entropy::SmoothnessClassSpec::make(kind, a.gamma, profile), a.d, delta, sub);
        } else {
            throw CLI::ValidationError("--class", "unknown class '" + a.class_name + "'");
        }
        csv += pf::sim::format_g17(rep.delta);
        csv += ',';
        csv += rep.lower_log ? pf::sim::format_g17(*rep.lower_log) : std::string();
        csv += ',';
        csv += pf::sim::format_g17(rep.upper_log);
        csv += ',';
        csv += rep.branch;
        csv += '\n';
    }
    if (a.out_path.empty())
        std::cout << csv;
    else
        write_file(a.out_path, csv);
    return 0;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
    std::string data_path;
    int order = 0;
    double lambda = -1.0;
    double c_bar = -1.0;
    int predict_grid = 0;
    bool as_json = false;
};

int run_fit(const FitArgs& a) {
    std::vector<double> xs, ys;
    std::istringstream in(read_file(a.data_path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("x,", 0) == 0) continue;
        double x, y;
        if (std::sscanf(line.c_str(), "%lf,%lf", &x, &y) != 2)
            throw std::runtime_error("fit: bad data line '" + line + "'");
        xs.push_back(x);
        ys.push_back(y);
    }
    pf::krr::KrrModel model;
    if (a.c_bar > 0.0)
        model = pf::krr::fit_constrained(a.order, xs, ys, a.c_bar);
    else
        model = pf::krr::fit(a.order, xs, ys, a.lambda >= 0.0 ? a.lambda : pf::krr::kLambdaMin);
    json j{{"order", model.order_k},
           {"n", model.xs.size()},
           {"lambda", model.lambda},
           {"rkhs_norm_sq", model.rkhs_norm},
           {"jitter", model.jitter}};
    if (a.as_json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << "order=" << model.order_k << " n=" << model.xs.size()
                  << " lambda=" << pf::sim::format_g17(model.lambda)
                  << " rkhs_norm_sq=" << pf::sim::format_g17(model.rkhs_norm)
                  << " jitter=" << pf::sim::format_g17(model.jitter) << "\n";
    if (a.predict_grid > 0) {
        std::cout << "x,prediction\n";
        for (int i = 0; i <= a.predict_grid; ++i) {
            const double x = static_cast<double>(i) / a.predict_grid;
            std::cout << pf::sim::format_g17(x) << ',' << pf::sim::format_g17(model.predict(x))
                      << "\n";
        }
    }
    return 0;
}

// --- sweep -------------------------------------------------------------------

int run_sweep(const std::string& config_path, const std::string& out_path,
              const std::string& meta_path, int threads) {
    const auto config = pf::io::parse_config_text(read_file(config_path));
    const auto rows = pf::sim::sweep(config, threads);
    const std::string csv = pf::sim::to_csv(rows);
    if (out_path.empty())
        std::cout << csv;
    else
        write_file(out_path, csv);
    if (!meta_path.empty()) write_file(meta_path, pf::io::run_metadata(config).dump(2) + "\n");
    return 0;
}

// --- slope --------------------------------------------------------------------

int run_slope(const std::string& csv_path, const std::string& token_filter, int degree_filter) {
    std::istringstream in(read_file(csv_path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("slope: empty csv");
    std::vector<std::string> cols;
    {
        std::stringstream hs(line);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    const auto col = [&](const std::string& name) {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return i;
        throw std::runtime_error("slope: column '" + name + "' not found");
    };
    const size_t ci_n = col("n"), ci_token = col("degree_token"), ci_used = col("degree_used"),
                 ci_mise = col("mise_mean");
    std::vector<double> ns, mises;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() < cols.size()) continue;
        if (!token_filter.empty() && fields[ci_token] != token_filter) continue;
        if (degree_filter >= 0 && std::stoi(fields[ci_used]) != degree_filter) continue;
        ns.push_back(std::stod(fields[ci_n]));
        mises.push_back(std::stod(fields[ci_mise]));
    }
    const auto fitres = pf::sim::slope_fit(ns, mises);
    const double half_ci = 1.96 * fitres.slope_stderr;
    std::cout << "points: " << ns.size() << "\n"
              << "slope: " << pf::sim::format_g17(fitres.slope) << "\n"
              << "ci95: [" << pf::sim::format_g17(fitres.slope - half_ci) << ", "
              << pf::sim::format_g17(fitres.slope + half_ci) << "]\n"
              << "intercept: " << pf::sim::format_g17(fitres.intercept) << "\n"
              << "r_squared: " << pf::sim::format_g17(fitres.r_squared) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-transition-aware nonparametric regression toolkit"};
    app.require_subcommand(1);

    RegimeArgs ra;
    auto* regime_cmd = app.add_subcommand("regime", "classify (n, sigma, gamma) into a regime");
    regime_cmd->add_option("--n", ra.n, "sample size")->required();
    regime_cmd->add_option("--sigma", ra.sigma, "noise standard deviation (default 1)");
    regime_cmd->add_option("--gamma", ra.gamma, "max smoothness index gamma");
    regime_cmd->add_flag("--analytic", ra.analytic, "analytic class (gamma = infinity)");
    regime_cmd->add_option("--class", ra.class_name, "sobolev|holder|poly-sub|holder-sub|ellipsoid");
    regime_cmd->add_option("--profile", ra.profile, "radius profile, e.g. constant:1");
    regime_cmd->add_option("--d", ra.d, "covariate dimension for the multivariate threshold");
    regime_cmd->add_flag("--json", ra.as_json, "emit JSON");

    EntropyArgs ea;
    auto* entropy_cmd = app.add_subcommand("entropy", "covering/packing bound reports (CSV)");
    entropy_cmd->add_option("--class", ea.class_name,
                            "poly-sub|holder-sub|ellipsoid|holder-full|poly-sub-d|holder-sub-d");
    entropy_cmd->add_option("--gamma", ea.gamma, "smoothness index gamma")->required();
    entropy_cmd->add_option("--profile", ea.profile, "radius profile, e.g. constant:1");
    entropy_cmd->add_option("--delta", ea.deltas, "resolution delta (repeatable)");
    entropy_cmd->add_option("--delta-grid", ea.delta_grid, "geometric grid min:max:count");
    entropy_cmd->add_option("--d", ea.d, "covariate dimension (multivariate classes)");
    entropy_cmd->add_option("--out", ea.out_path, "write CSV here instead of stdout");

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "fit a single KRR model from x,y CSV data");
    fit_cmd->add_option("--data", fa.data_path, "CSV file with x,y rows")->required();
    fit_cmd->add_option("--order", fa.order, "kernel order k")->required();
    fit_cmd->add_option("--lambda", fa.lambda, "ridge penalty (default near-interpolation)");
    fit_cmd->add_option("--c-bar", fa.c_bar, "RKHS norm budget (constrained fit)");
    fit_cmd->add_option("--predict-grid", fa.predict_grid, "also print predictions on a grid");
    fit_cmd->add_flag("--json", fa.as_json, "emit JSON summary");

    std::string sweep_config, sweep_out, sweep_meta;
    int sweep_threads = default_threads();
    auto* sweep_cmd = app.add_subcommand("sweep", "run a Monte Carlo experiment sweep");
    sweep_cmd->add_option("--config", sweep_config, "experiment config JSON")->required();
    sweep_cmd->add_option("--out", sweep_out, "result CSV path (default stdout)");
    sweep_cmd->add_option("--meta", sweep_meta, "run-metadata JSON path");
    sweep_cmd->add_option("--threads", sweep_threads,
                          "worker cap (default PHASEFIT_THREADS or hardware)");

    std::string slope_csv, slope_token;
    int slope_degree = -1;
    auto* slope_cmd = app.add_subcommand("slope", "OLS slope of log(mise) vs log(n) from a CSV");
    slope_cmd->add_option("--csv", slope_csv, "sweep result CSV")->required();
    slope_cmd->add_option("--degree-token", slope_token, "filter rows by degree token");
    slope_cmd->add_option("--degree-used", slope_degree, "filter rows by fitted order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (regime_cmd->parsed()) return run_regime(ra);
        if (entropy_cmd->parsed()) return run_entropy(ea);
        if (fit_cmd->parsed()) return run_fit(fa);
        if (sweep_cmd->parsed()) return run_sweep(sweep_config, sweep_out, sweep_meta, sweep_threads);
        if (slope_cmd->parsed()) return run_slope(slope_csv, slope_token, slope_degree);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const phasefit::io::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
