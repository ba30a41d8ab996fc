// kkf: batch CLI for Koopman Kalman filtering experiments.
//
// Commands: fit, filter, estimate, bench, error-decay.
// Global flags (also settable via KKF_* environment variables):
//   --config PATH, --seed INT, --out DIR, --workers INT, --set key=value
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kkf/experiments.hpp"
#include "kkf/filters.hpp"
#include "kkf/io.hpp"
#include "kkf/kedmd.hpp"
#include "kkf/kernels.hpp"
#include "kkf/paramest.hpp"
#include "kkf/systems.hpp"

namespace fs = std::filesystem;
using namespace kkf;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 42;
    std::string out = ".";
    int workers = 0;
    std::vector<std::string> overrides;
};

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

void apply_override(Json& config, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got: " + spec);
    const std::string key = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);

    Json* node = &config;
    std::istringstream parts(key);
    std::string part, prev;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];

    Json value;
    try {
        value = Json::parse(raw);
    } catch (const std::exception&) {
        value = raw;  // not valid JSON: treat as a plain string
    }
    (*node)[path.back()] = value;
}

Json load_config(const GlobalOpts& opts) {
    Json config = Json::object();
    if (!opts.config_path.empty()) {
        config = read_json_file(opts.config_path);
        if (!config.is_object()) throw ConfigError("config root must be a JSON object");
    }
    for (const auto& spec : opts.overrides) apply_override(config, spec);
    return config;
}

void check_keys(const Json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
    if (!j.is_object()) throw ConfigError("expected a JSON object at " + where);
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw ConfigError("unknown config key: " + where + item.key());
    }
}

const Json& need(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing config key: " + where + key);
    return j.at(key);
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

fs::path prepare_out_dir(const GlobalOpts& opts) {
    fs::path dir(opts.out);
    fs::create_directories(dir);
    return dir;
}

/// The fully-resolved configuration is written next to the outputs so every
/// run is reproducible from its artifacts alone.
void write_resolved(const fs::path& dir, const std::string& command, const GlobalOpts& opts,
                    const Json& resolved) {
    Json full{{"command", command},
              {"seed", opts.seed},
              {"workers", opts.workers},
              {"config", resolved}};
    write_text_file((dir / "resolved_config.json").string(), full.dump(2) + "\n");
}

void write_metadata(const fs::path& dir, const std::string& command, const GlobalOpts& opts,
                    const Json& resolved, const Json& extra = Json::object()) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    Json meta{{"command", command},
              {"seed", opts.seed},
              {"config_hash", hex64(fnv1a(resolved.dump()))},
              {"timestamp_unix",
               std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
    meta.update(extra);
    write_text_file((dir / "metadata.json").string(), meta.dump(2) + "\n");
}

Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("CSV file is empty: " + path);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            try {
                row.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw ConfigError("non-numeric CSV field in " + path + ": " + field);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("ragged CSV rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("CSV file has a header but no data rows: " + path);
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

// ---------------------------------------------------------------------------
// Config fragments shared by several commands
// ---------------------------------------------------------------------------

Kernel parse_kernel(const Json& j, const std::string& where) {
    check_keys(j, {"family", "length_scale", "variance"}, where);
    Kernel k;
    k.family = kernel_family_from_string(j.value("family", std::string("matern12")));
    if (!j.contains("length_scale"))
        throw ConfigError("missing config key: " + where + "length_scale");
    k.length_scale = j.at("length_scale").get<double>();
    k.variance = j.value("variance", 1.0);
    require(k.length_scale > 0.0, where + "length_scale must be positive");
    require(k.variance > 0.0, where + "variance must be positive");
    return k;
}

Json kernel_json(const Kernel& k) {
    return Json{{"family", to_string(k.family)},
                {"length_scale", k.length_scale},
                {"variance", k.variance}};
}

struct BuiltSystem {
    ObservedSystem sys;
    std::optional<LinearGaussianSystem> linear;
    Vector default_x0;
    Json resolved;
};

BuiltSystem parse_system(const Json& j, Rng& rng) {
    const std::string where = "system.";
    check_keys(j, {"type", "A", "C", "Q", "R", "entry_variance", "params", "observed",
                   "noise_variance", "clamp"},
               where);
    const std::string type = need(j, "type", where).get<std::string>();

    BuiltSystem built;
    if (type == "random_linear") {
        const double var = j.value("entry_variance", 0.5);
        LinearGaussianSystem lin = make_random_linear(rng, 3, 2, var);
        built.sys = lin;
        built.linear = lin;
        built.default_x0 = Vector{{1.0, 1.5, 2.0}};
        built.resolved = Json{{"type", type},
                              {"entry_variance", var},
                              {"A", matrix_to_json(lin.A)},
                              {"C", matrix_to_json(lin.C)}};
        return built;
    }
    if (type == "linear") {
        LinearGaussianSystem lin(matrix_from_json(need(j, "A", where)),
                                 matrix_from_json(need(j, "C", where)),
                                 matrix_from_json(need(j, "Q", where)),
                                 matrix_from_json(need(j, "R", where)));
        built.sys = lin;
        built.linear = lin;
        built.default_x0 = Vector::Zero(lin.state_dim);
        built.resolved = Json{{"type", type},
                              {"A", matrix_to_json(lin.A)},
                              {"C", matrix_to_json(lin.C)},
                              {"Q", matrix_to_json(lin.process_cov)},
                              {"R", matrix_to_json(lin.obs_cov)}};
        return built;
    }

    const EpidemicModel model = epidemic_model_from_string(type);
    EpidemicParams prm;
    if (j.contains("params")) {
        const Json& p = j.at("params");
        check_keys(p, {"alpha", "beta", "gamma", "delta", "p"}, where + "params.");
        prm.alpha = p.value("alpha", prm.alpha);
        prm.beta = p.value("beta", prm.beta);
        prm.gamma = p.value("gamma", prm.gamma);
        prm.delta = p.value("delta", prm.delta);
        prm.p_exponent = p.value("p", prm.p_exponent);
    }
    std::vector<int> observed = j.value("observed", std::vector<int>{1});
    const double noise = j.value("noise_variance", 0.01);
    const bool clamp = j.value("clamp", false);
    require(noise >= 0.0, where + "noise_variance must be >= 0");
    const int n = epidemic_state_dim(model);
    built.sys = make_epidemic(model, prm,
                              noise * Matrix::Identity(n, n),
                              noise * Matrix::Identity(static_cast<Eigen::Index>(observed.size()),
                                                       static_cast<Eigen::Index>(observed.size())),
                              observed, clamp);
    built.default_x0 = epidemic_x0(model);
    built.resolved = Json{{"type", type},
                          {"params",
                           {{"alpha", prm.alpha},
                            {"beta", prm.beta},
                            {"gamma", prm.gamma},
                            {"delta", prm.delta},
                            {"p", prm.p_exponent}}},
                          {"observed", observed},
                          {"noise_variance", noise},
                          {"clamp", clamp}};
    return built;
}

StateSampler parse_sampler(const Json& j, int state_dim, const std::string& where) {
    check_keys(j, {"lo", "hi"}, where);
    Vector lo = vector_from_json(need(j, "lo", where));
    Vector hi = vector_from_json(need(j, "hi", where));
    require(lo.size() == state_dim && hi.size() == state_dim,
            where + "lo/hi must match the state dimension");
    return uniform_box_sampler(lo, hi);
}

GaussianPrior parse_prior(const Json& j, const Vector& default_mean, const std::string& where) {
    GaussianPrior prior{default_mean,
                        0.1 * Matrix::Identity(default_mean.size(), default_mean.size())};
    if (j.is_null()) return prior;
    check_keys(j, {"mean", "cov", "cov_scale"}, where);
    if (j.contains("mean")) prior.mean = vector_from_json(j.at("mean"));
    if (j.contains("cov"))
        prior.cov = matrix_from_json(j.at("cov"));
    else if (j.contains("cov_scale"))
        prior.cov = j.at("cov_scale").get<double>() *
                    Matrix::Identity(prior.mean.size(), prior.mean.size());
    else
        prior.cov = 0.1 * Matrix::Identity(prior.mean.size(), prior.mean.size());
    require(prior.cov.rows() == prior.mean.size() && prior.cov.cols() == prior.mean.size(),
            where + "cov shape must match mean");
    return prior;
}

Json prior_json(const GaussianPrior& p) {
    return Json{{"mean", vector_to_json(p.mean)}, {"cov", matrix_to_json(p.cov)}};
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_fit(const GlobalOpts& opts) {
    Json cfg = load_config(opts);
    check_keys(cfg, {"system", "kernel", "N", "lambda", "sampler"}, "");
    Rng rng = make_rng(opts.seed);

    BuiltSystem built = parse_system(need(cfg, "system", ""), rng);
    Kernel kernel = parse_kernel(need(cfg, "kernel", ""), "kernel.");
    const int N = need(cfg, "N", "").get<int>();
    std::optional<double> lambda;
    if (cfg.contains("lambda")) lambda = cfg.at("lambda").get<double>();
    StateSampler sampler =
        parse_sampler(need(cfg, "sampler", ""), built.sys.state_dim, "sampler.");

    KoopmanModel model = fit(built.sys, sampler, kernel, N, lambda, rng);
    const InterpolationResiduals res = interpolation_residuals(model);

    Matrix Kreg = gram(kernel, model.nodes, model.nodes);
    Kreg.diagonal().array() += model.lambda;
    Eigen::JacobiSVD<Matrix> svd(Kreg);
    const double cond = svd.singularValues()(0) /
                        std::max(svd.singularValues()(svd.singularValues().size() - 1), 1e-300);

    const fs::path dir = prepare_out_dir(opts);
    write_text_file((dir / "model.json").string(), to_json(model).dump() + "\n");
    Json report{{"N", N},
                {"lambda", model.lambda},
                {"condition_estimate", cond},
                {"residual_propagation", res.propagation},
                {"residual_observation", res.observation},
                {"residual_state", res.state}};
    write_text_file((dir / "fit_report.json").string(), report.dump(2) + "\n");

    Json resolved{{"system", built.resolved},
                  {"kernel", kernel_json(kernel)},
                  {"N", N},
                  {"lambda", model.lambda},
                  {"sampler", cfg.at("sampler")}};
    write_resolved(dir, "fit", opts, resolved);
    write_metadata(dir, "fit", opts, resolved);
    std::cout << "fit: N=" << N << " lambda=" << model.lambda
              << " max_residual=" << std::max({res.propagation, res.observation, res.state})
              << "\n";
    return 0;
}

int cmd_filter(const GlobalOpts& opts) {
    Json cfg = load_config(opts);
    check_keys(cfg,
               {"algorithm", "system", "T", "x0", "prior", "observations", "n_samples",
                "particles", "model_artifact", "fit", "ci_level"},
               "");
    const std::string algorithm = need(cfg, "algorithm", "").get<std::string>();
    const std::vector<std::string> known = {"kf", "kkf", "ekf", "ukf", "pf"};
    if (std::find(known.begin(), known.end(), algorithm) == known.end())
        throw ConfigError("unknown algorithm: " + algorithm +
                          " (expected kf, kkf, ekf, ukf or pf)");

    Rng rng = make_rng(opts.seed);
    BuiltSystem built = parse_system(need(cfg, "system", ""), rng);
    const int n = built.sys.state_dim;

    Vector x0 = cfg.contains("x0") ? vector_from_json(cfg.at("x0")) : built.default_x0;
    require(x0.size() == n, "x0 dimension must match the system state dimension");
    GaussianPrior prior =
        parse_prior(cfg.contains("prior") ? cfg.at("prior") : Json(), x0, "prior.");

    Matrix observations, truth;
    bool have_truth = false;
    if (cfg.contains("observations")) {
        // Rows are time steps, columns observation coordinates.
        observations = read_csv_matrix(cfg.at("observations").get<std::string>()).transpose();
        require(observations.rows() == built.sys.obs_dim,
                "observations file column count must match the observation dimension");
    } else {
        const int T = need(cfg, "T", "").get<int>();
        auto sim = simulate(built.sys, x0, T, rng);
        truth = sim.first;
        observations = sim.second;
        have_truth = true;
    }

    FilterTrace trace;
    Json algo_resolved{{"algorithm", algorithm}};
    if (algorithm == "kf") {
        if (!built.linear) throw ConfigError("kf requires a linear system");
        trace = kalman_filter(*built.linear, prior, observations);
    } else if (algorithm == "ekf") {
        trace = ekf(built.sys, prior, observations);
    } else if (algorithm == "ukf") {
        trace = ukf(built.sys, prior, observations);
    } else if (algorithm == "pf") {
        const int particles = need(cfg, "particles", "").get<int>();
        require(particles >= 2, "particles must be >= 2");
        trace = particle_filter(built.sys, prior, observations, particles, rng);
        algo_resolved["particles"] = particles;
    } else {  // kkf
        const int n_samples = cfg.value("n_samples", 100);
        KoopmanModel model;
        if (cfg.contains("model_artifact")) {
            model = koopman_model_from_json(
                read_json_file(cfg.at("model_artifact").get<std::string>()));
            require(model.state_dim() == n, "model artifact state dimension mismatch");
        } else {
            const Json& f = need(cfg, "fit", "");
            check_keys(f, {"kernel", "N", "lambda", "sampler"}, "fit.");
            Kernel kernel = parse_kernel(need(f, "kernel", "fit."), "fit.kernel.");
            std::optional<double> lambda;
            if (f.contains("lambda")) lambda = f.at("lambda").get<double>();
            model = fit(built.sys, parse_sampler(need(f, "sampler", "fit."), n, "fit.sampler."),
                        kernel, need(f, "N", "fit.").get<int>(), lambda, rng);
        }
        trace = kkf::kkf(built.sys, model, prior, observations, n_samples, rng);
        algo_resolved["n_samples"] = n_samples;
    }

    const double ci_level = cfg.value("ci_level", 0.95);
    const ConfidenceBands bands = confidence_intervals(trace, ci_level);

    const fs::path dir = prepare_out_dir(opts);
    {
        std::vector<std::string> header{"step"};
        for (int i = 0; i < n; ++i) header.push_back("est_" + std::to_string(i));
        for (int i = 0; i < n; ++i) header.push_back("var_" + std::to_string(i));
        CsvWriter csv((dir / "trace.csv").string(), header);
        for (int k = 0; k <= trace.horizon(); ++k) {
            std::vector<std::string> fields{std::to_string(k)};
            for (int i = 0; i < n; ++i) fields.push_back(num(trace.estimates(i, k)));
            for (int i = 0; i < n; ++i)
                fields.push_back(num(trace.covariances[static_cast<std::size_t>(k)](i, i)));
            csv.row(fields);
        }
    }
    {
        std::vector<std::string> header{"step"};
        for (int i = 0; i < n; ++i) header.push_back("lower_" + std::to_string(i));
        for (int i = 0; i < n; ++i) header.push_back("upper_" + std::to_string(i));
        CsvWriter csv((dir / "ci.csv").string(), header);
        for (int k = 0; k <= trace.horizon(); ++k) {
            std::vector<std::string> fields{std::to_string(k)};
            for (int i = 0; i < n; ++i) fields.push_back(num(bands.lower(i, k)));
            for (int i = 0; i < n; ++i) fields.push_back(num(bands.upper(i, k)));
            csv.row(fields);
        }
    }

    Json resolved{{"algorithm", algo_resolved},
                  {"system", built.resolved},
                  {"x0", vector_to_json(x0)},
                  {"prior", prior_json(prior)},
                  {"ci_level", ci_level},
                  {"T", trace.horizon()}};
    write_resolved(dir, "filter", opts, resolved);
    Json extra{{"wall_time_seconds", trace.wall_time}};
    if (have_truth) extra["l2_error_vs_truth"] = l2_trajectory_error(trace.estimates, truth);
    write_metadata(dir, "filter", opts, resolved, extra);
    std::cout << "filter: " << algorithm << " T=" << trace.horizon()
              << " wall_time=" << trace.wall_time << "s\n";
    return 0;
}

int cmd_estimate(const GlobalOpts& opts) {
    Json cfg = load_config(opts);
    check_keys(cfg,
               {"model", "chains", "iterations", "warmup", "T", "N", "n_samples",
                "pushforward_draws", "prior_mean", "prior_variance", "state_prior_variance",
                "param_noise_variance", "noise_variance", "kernel_family", "kernel_length_scale",
                "lambda", "state_box", "param_box", "trajectory_nodes", "node_noise", "clamp",
                "accumulate_noise"},
               "");
    EstimationConfig ec;
    ec.model = epidemic_model_from_string(cfg.value("model", std::string("sir")));
    ec.chains = cfg.value("chains", ec.chains);
    ec.iterations = cfg.value("iterations", ec.iterations);
    ec.warmup = cfg.value("warmup", ec.iterations / 2);
    ec.T = cfg.value("T", ec.T);
    ec.N = cfg.value("N", ec.N);
    ec.n_samples = cfg.value("n_samples", ec.n_samples);
    ec.pushforward_draws = cfg.value("pushforward_draws", ec.pushforward_draws);
    ec.prior_mean = cfg.value("prior_mean", ec.prior_mean);
    ec.prior_variance = cfg.value("prior_variance", ec.prior_variance);
    ec.state_prior_variance = cfg.value("state_prior_variance", ec.state_prior_variance);
    ec.param_noise_variance = cfg.value("param_noise_variance", ec.param_noise_variance);
    ec.noise_variance = cfg.value("noise_variance", ec.noise_variance);
    if (cfg.contains("kernel_family"))
        ec.kernel_family = kernel_family_from_string(cfg.at("kernel_family").get<std::string>());
    ec.kernel_length_scale = cfg.value("kernel_length_scale", ec.kernel_length_scale);
    ec.lambda = cfg.value("lambda", ec.lambda);
    ec.trajectory_nodes = cfg.value("trajectory_nodes", ec.trajectory_nodes);
    ec.node_noise = cfg.value("node_noise", ec.node_noise);
    ec.clamp = cfg.value("clamp", ec.clamp);
    ec.accumulate_noise = cfg.value("accumulate_noise", ec.accumulate_noise);
    if (cfg.contains("state_box")) {
        ec.state_box_lo = cfg.at("state_box").at(0).get<double>();
        ec.state_box_hi = cfg.at("state_box").at(1).get<double>();
    }
    if (cfg.contains("param_box")) {
        ec.param_box_lo = cfg.at("param_box").at(0).get<double>();
        ec.param_box_hi = cfg.at("param_box").at(1).get<double>();
    }
    ec.seed = opts.seed;
    ec.workers = opts.workers;

    const EstimationBenchResult result = estimation_benchmark(ec);
    const fs::path dir = prepare_out_dir(opts);

    const Eigen::Index np = result.true_params.size();
    for (std::size_t c = 0; c < result.summary.chain_traces.size(); ++c) {
        std::vector<std::string> header{"iteration"};
        for (Eigen::Index p = 0; p < np; ++p) header.push_back("param_" + std::to_string(p));
        CsvWriter csv((dir / ("chain_" + std::to_string(c) + ".csv")).string(), header);
        const Matrix& t = result.summary.chain_traces[c];
        for (Eigen::Index it = 0; it < t.rows(); ++it) {
            std::vector<std::string> fields{std::to_string(it)};
            for (Eigen::Index p = 0; p < np; ++p) fields.push_back(num(t(it, p)));
            csv.row(fields);
        }
    }

    Json densities = Json::array();
    for (const auto& d : result.summary.densities)
        densities.push_back(Json{{"grid", vector_to_json(d.grid)},
                                 {"values", vector_to_json(d.values)}});
    Json references = Json::array();
    for (const auto& ref : mcmc_reference_rows()) {
        if (ref.model != to_string(result.model)) continue;
        references.push_back(Json{{"method", ref.method},
                                  {"model", ref.model},
                                  {"l2_error", ref.l2_error},
                                  {"exec_time", ref.exec_time},
                                  {"note", ref.note}});
    }
    Json summary{{"model", to_string(result.model)},
                 {"true_params", vector_to_json(result.true_params)},
                 {"mean", vector_to_json(result.summary.mean)},
                 {"ci_lower", vector_to_json(result.summary.ci_lower)},
                 {"ci_upper", vector_to_json(result.summary.ci_upper)},
                 {"warmup", result.summary.warmup},
                 {"level", result.summary.level},
                 {"densities", densities},
                 {"pushforward_mean_l2_error", result.pushforward.mean_error},
                 {"wall_time_seconds", result.wall_time},
                 {"reference_rows", references}};
    write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");

    Json resolved{{"model", to_string(ec.model)},
                  {"chains", ec.chains},
                  {"iterations", ec.iterations},
                  {"warmup", ec.warmup},
                  {"T", ec.T},
                  {"N", ec.N},
                  {"n_samples", ec.n_samples},
                  {"pushforward_draws", ec.pushforward_draws},
                  {"prior_mean", ec.prior_mean},
                  {"prior_variance", ec.prior_variance},
                  {"state_prior_variance", ec.state_prior_variance},
                  {"param_noise_variance", ec.param_noise_variance},
                  {"noise_variance", ec.noise_variance},
                  {"kernel_family", to_string(ec.kernel_family)},
                  {"kernel_length_scale", ec.kernel_length_scale},
                  {"lambda", ec.lambda},
                  {"state_box", {ec.state_box_lo, ec.state_box_hi}},
                  {"param_box", {ec.param_box_lo, ec.param_box_hi}},
                  {"trajectory_nodes", ec.trajectory_nodes},
                  {"node_noise", ec.node_noise},
                  {"clamp", ec.clamp},
                  {"accumulate_noise", ec.accumulate_noise}};
    write_resolved(dir, "estimate", opts, resolved);
    write_metadata(dir, "estimate", opts, resolved,
                   Json{{"wall_time_seconds", result.wall_time}});
    std::cout << "estimate: " << to_string(result.model) << " mean=[";
    for (Eigen::Index p = 0; p < np; ++p)
        std::cout << (p ? ", " : "") << result.summary.mean[p];
    std::cout << "] pushforward_l2=" << result.pushforward.mean_error << "\n";
    return 0;
}

int cmd_bench(const GlobalOpts& opts) {
    Json cfg = load_config(opts);
    check_keys(cfg,
               {"setting", "replications", "T", "n_samples", "pf_sizes", "kkf_sizes",
                "kernel_length_scale", "lambda", "node_box", "trajectory_nodes", "node_noise_scale",
                "noise_variance",
                "prior_variance", "clamp", "accumulate_noise", "include_fit_time"},
               "");
    SirBenchConfig bc;
    bc.setting = cfg.value("setting", bc.setting);
    bc.replications = cfg.value("replications", bc.replications);
    bc.T = cfg.value("T", bc.T);
    bc.n_samples = cfg.value("n_samples", bc.n_samples);
    bc.pf_sizes = cfg.value("pf_sizes", bc.pf_sizes);
    bc.kkf_sizes = cfg.value("kkf_sizes", bc.kkf_sizes);
    bc.kernel_length_scale = cfg.value("kernel_length_scale", bc.kernel_length_scale);
    bc.lambda = cfg.value("lambda", bc.lambda);
    if (cfg.contains("node_box")) {
        bc.node_box_lo = cfg.at("node_box").at(0).get<double>();
        bc.node_box_hi = cfg.at("node_box").at(1).get<double>();
    }
    bc.trajectory_nodes = cfg.value("trajectory_nodes", bc.trajectory_nodes);
    bc.node_noise_scale = cfg.value("node_noise_scale", bc.node_noise_scale);
    bc.noise_variance = cfg.value("noise_variance", bc.noise_variance);
    bc.prior_variance = cfg.value("prior_variance", bc.prior_variance);
    bc.clamp = cfg.value("clamp", bc.clamp);
    bc.accumulate_noise = cfg.value("accumulate_noise", bc.accumulate_noise);
    bc.include_fit_time = cfg.value("include_fit_time", bc.include_fit_time);
    bc.seed = opts.seed;
    bc.workers = opts.workers;

    const SirBenchResult result = sir_benchmark(bc);
    const fs::path dir = prepare_out_dir(opts);
    {
        CsvWriter csv((dir / "runs.csv").string(),
                      {"replication", "algorithm", "beta", "error", "time", "fit_time", "ok"});
        for (const auto& r : result.runs)
            csv.row(r.replication, r.algorithm, r.beta, r.error, r.time, r.fit_time,
                    static_cast<int>(r.ok));
    }
    {
        CsvWriter csv((dir / "table.csv").string(),
                      {"algorithm", "setting", "mean_error", "mean_time", "mean_fit_time",
                       "replications", "failures"});
        for (const auto& r : result.rows)
            csv.row(r.algorithm, r.setting, r.mean_error, r.mean_time, r.mean_fit_time,
                    r.replications, r.failures);
    }

    Json resolved{{"setting", bc.setting},
                  {"replications", bc.replications},
                  {"T", bc.T},
                  {"n_samples", bc.n_samples},
                  {"pf_sizes", bc.pf_sizes},
                  {"kkf_sizes", bc.kkf_sizes},
                  {"kernel_length_scale", bc.kernel_length_scale},
                  {"lambda", bc.lambda},
                  {"node_box", {bc.node_box_lo, bc.node_box_hi}},
                  {"trajectory_nodes", bc.trajectory_nodes},
                  {"node_noise_scale", bc.node_noise_scale},
                  {"noise_variance", bc.noise_variance},
                  {"prior_variance", bc.prior_variance},
                  {"clamp", bc.clamp},
                  {"accumulate_noise", bc.accumulate_noise},
                  {"include_fit_time", bc.include_fit_time},
                  {"x0", vector_to_json(bc.x0)}};
    write_resolved(dir, "bench", opts, resolved);
    write_metadata(dir, "bench", opts, resolved);
    for (const auto& r : result.rows)
        std::cout << "bench setting " << r.setting << ": " << r.algorithm
                  << " mean_error=" << r.mean_error << " mean_time=" << r.mean_time << "s\n";
    return 0;
}

int cmd_error_decay(const GlobalOpts& opts) {
    Json cfg = load_config(opts);
    check_keys(cfg,
               {"systems_count", "N_grid", "T", "n_samples", "kernel_length_scale",
                "node_box_halfwidth"},
               "");
    ErrorDecayConfig dc;
    dc.systems_count = cfg.value("systems_count", dc.systems_count);
    dc.N_grid = cfg.value("N_grid", dc.N_grid);
    dc.T = cfg.value("T", dc.T);
    dc.n_samples = cfg.value("n_samples", dc.n_samples);
    dc.kernel_length_scale = cfg.value("kernel_length_scale", dc.kernel_length_scale);
    dc.node_box_halfwidth = cfg.value("node_box_halfwidth", dc.node_box_halfwidth);
    dc.seed = opts.seed;
    dc.workers = opts.workers;

    const ErrorDecayResult result = error_decay_study(dc);
    const fs::path dir = prepare_out_dir(opts);
    {
        CsvWriter csv((dir / "errors.csv").string(), {"system", "N", "error"});
        for (int s = 0; s < result.errors.rows(); ++s)
            for (std::size_t j = 0; j < result.N_grid.size(); ++j)
                csv.row(s, result.N_grid[j], result.errors(s, static_cast<Eigen::Index>(j)));
    }
    Json fit_report{{"C_fit", result.fit.C},
                    {"alpha_fit", result.fit.alpha},
                    {"excluded_zero_errors", result.fit.excluded}};
    write_text_file((dir / "fit.json").string(), fit_report.dump(2) + "\n");

    Json resolved{{"systems_count", dc.systems_count},
                  {"N_grid", dc.N_grid},
                  {"T", dc.T},
                  {"n_samples", dc.n_samples},
                  {"kernel_length_scale", dc.kernel_length_scale},
                  {"node_box_halfwidth", dc.node_box_halfwidth}};
    write_resolved(dir, "error-decay", opts, resolved);
    write_metadata(dir, "error-decay", opts, resolved);
    std::cout << "error-decay: alpha_fit=" << result.fit.alpha << " C_fit=" << result.fit.C
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman Kalman filter experiment runner"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "JSON configuration file")
        ->envname("KKF_CONFIG");
    app.add_option("--seed", opts.seed, "global random seed")->envname("KKF_SEED");
    app.add_option("--out", opts.out, "output directory")->envname("KKF_OUT");
    app.add_option("--workers", opts.workers, "worker thread count (0 = all cores)")
        ->envname("KKF_WORKERS");
    app.add_option("--set", opts.overrides, "config override, key=value (repeatable)");

    auto* fit_cmd = app.add_subcommand("fit", "fit a Koopman model artifact");
    auto* filter_cmd = app.add_subcommand("filter", "run a filter and emit trace CSVs");
    auto* estimate_cmd = app.add_subcommand("estimate", "iterated-filtering parameter estimation");
    auto* bench_cmd = app.add_subcommand("bench", "SIR filtering benchmark");
    auto* decay_cmd = app.add_subcommand("error-decay", "KKF-vs-KF error decay study");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(fit_cmd)) return cmd_fit(opts);
        if (app.got_subcommand(filter_cmd)) return cmd_filter(opts);
        if (app.got_subcommand(estimate_cmd)) return cmd_estimate(opts);
        if (app.got_subcommand(bench_cmd)) return cmd_bench(opts);
        if (app.got_subcommand(decay_cmd)) return cmd_error_decay(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
