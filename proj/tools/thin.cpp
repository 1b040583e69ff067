// Command line front end: `thin run` streams one experiment, `thin oracle`
// prints a ground-truth optimum, `thin replicate` aggregates repeated runs.
// All output is JSON on stdout; errors go to stderr with a nonzero exit.

#include "streamthin/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

using nlohmann::json;
using namespace streamthin;

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json oracle_json(const OracleResult& o) {
    json j{{"example", o.example},
           {"alpha", o.alpha},
           {"phi_star", o.phi_star},
           {"c_star", o.c_star}};
    json region = json::object();
    for (std::size_t i = 0; i < o.region.size(); ++i) region[o.region_names[i]] = o.region[i];
    j["region"] = region;
    if (o.m_star) j["m_star"] = matrix_json(*o.m_star);
    return j;
}

// Options shared by `run` and `replicate`.
struct RunOptions {
    std::string stream_spec;
    std::string method = "thinner";
    std::string mode = "fixed";
    std::string model;
    std::string trace;
    std::string oracle;
    std::string exchange_rule = "simplified";
    std::string histogram;
    double alpha = 0.5;
    long long n = 0;
    long long horizon = 0;
    long long buffer = 0;
    std::uint64_t seed = 1;
    double eps1 = 0.0;
    long long k0 = 0;
    double q_exp = 0.625;
    double gamma = 0.1;
    double beta_floor = 0.0;
};

void add_run_options(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--stream", opt.stream_spec,
                    "source, e.g. quad-normal | normal:d=5 | uniform:d=2 | mixture | "
                    "three-spheres:d=5,r1=3,r2=2,r3=1 | ramp | sine:nu=5 | file:PATH")
        ->required();
    cmd->add_option("--method", opt.method, "selector")
        ->check(CLI::IsMember({"thinner", "exchange", "iboss"}));
    cmd->add_option("--alpha", opt.alpha, "selection rate (ignored when --n is set)");
    cmd->add_option("--n", opt.n, "selection quota");
    cmd->add_option("--horizon", opt.horizon, "stream length N");
    cmd->add_option("--mode", opt.mode, "quota handling (thinner)")
        ->check(CLI::IsMember({"fixed", "force", "adaptive"}));
    cmd->add_option("--scramble-buffer", opt.buffer, "buffer size B, 0/1 disables");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--trace", opt.trace, "per-candidate trace file");
    cmd->add_option("--oracle", opt.oracle,
                    "attach ground truth: quad-normal | multilinear-normal | mixture | "
                    "three-spheres | quad01-design | uniform-square");
    cmd->add_option("--model", opt.model, "identity | intercept | poly:DEGREE");
    cmd->add_option("--eps1", opt.eps1, "forced-selection floor on n_k/k");
    cmd->add_option("--k0", opt.k0, "initialization sample size (0 = 5p)");
    cmd->add_option("--q-exp", opt.q_exp, "threshold recursion exponent");
    cmd->add_option("--gamma", opt.gamma, "bandwidth decay exponent");
    cmd->add_option("--beta-floor", opt.beta_floor, "lower bound on the threshold gain");
    cmd->add_option("--exchange-rule", opt.exchange_rule)
        ->check(CLI::IsMember({"simplified", "exact"}));
    cmd->add_option("--histogram", opt.histogram,
                    "density table of selected scalar points (thinner/iboss)");
}

RunConfig build_config(const RunOptions& opt) {
    RunConfig cfg;
    cfg.stream = parse_stream_spec(opt.stream_spec);
    if (opt.horizon > 0) cfg.stream.n_total = opt.horizon;
    cfg.stream.seed = opt.seed;
    if (!opt.model.empty()) {
        if (opt.model == "identity") {
            cfg.stream.model = Identity{};
        } else if (opt.model == "intercept") {
            cfg.stream.model = WithIntercept{};
        } else if (opt.model.rfind("poly", 0) == 0) {
            int degree = 2;
            if (auto pos = opt.model.find(':'); pos != std::string::npos) {
                degree = std::stoi(opt.model.substr(pos + 1));
            }
            cfg.stream.model = Polynomial{degree};
        } else {
            throw CLI::ValidationError("--model", "unknown model: " + opt.model);
        }
    }
    if (opt.method == "thinner") {
        cfg.method = Method::Thinner;
    } else if (opt.method == "exchange") {
        cfg.method = Method::Exchange;
    } else {
        cfg.method = Method::Iboss;
    }
    cfg.alpha = opt.alpha;
    cfg.n = opt.n;
    cfg.mode = opt.mode == "fixed" ? QuotaMode::Fixed
               : opt.mode == "force" ? QuotaMode::Force
                                     : QuotaMode::Adaptive;
    cfg.scramble_buffer = opt.buffer;
    cfg.trace_path = opt.trace;
    cfg.oracle = opt.oracle;
    cfg.eps1 = opt.eps1;
    cfg.k0 = opt.k0;
    cfg.q_exp = opt.q_exp;
    cfg.gamma = opt.gamma;
    cfg.beta_floor = opt.beta_floor;
    cfg.exchange_rule =
        opt.exchange_rule == "exact" ? ExchangeRule::Exact : ExchangeRule::Simplified;
    cfg.keep_selected = !opt.histogram.empty();
    return cfg;
}

json summary_json(const RunSummary& sum, const RunOptions& opt) {
    json j{{"method", opt.method},
           {"stream", opt.stream_spec},
           {"seed", opt.seed},
           {"alpha", sum.alpha_effective},
           {"n_seen", sum.n_seen},
           {"n_selected", sum.n_selected},
           {"final_phi", sum.final_phi},
           {"final_threshold", sum.final_threshold},
           {"runtime_sec", sum.runtime_sec},
           {"final_m", matrix_json(sum.final_m)}};
    if (sum.d_eff) j["d_efficiency"] = *sum.d_eff;
    if (sum.oracle) j["oracle"] = oracle_json(*sum.oracle);
    return j;
}

void emit_selected_histogram(const RunSummary& sum, const std::string& path) {
    std::vector<double> xs;
    xs.reserve(sum.selected_raw.size());
    for (const auto& x : sum.selected_raw) {
        if (x.size() != 1) throw std::runtime_error("--histogram needs scalar raw points");
        xs.push_back(x(0));
    }
    write_histogram(path, emit_histogram(xs));
}

int run_main(const RunOptions& opt) {
    RunConfig cfg = build_config(opt);
    RunSummary sum = run_experiment(cfg);
    if (!opt.histogram.empty()) emit_selected_histogram(sum, opt.histogram);
    std::cout << summary_json(sum, opt).dump(2) << "\n";
    return 0;
}

int oracle_main(const std::string& example, double alpha, int dim, double r1, double r2,
                double r3) {
    json j;
    if (example == "quad-normal") {
        j = oracle_json(oracle_quad_normal(alpha));
    } else if (example == "multilinear-normal") {
        j = oracle_json(oracle_multilinear_normal(alpha, dim));
    } else if (example == "mixture") {
        j = oracle_json(oracle_mixture_normal_discrete(alpha));
    } else if (example == "three-spheres") {
        j = oracle_json(oracle_three_spheres(alpha, dim, r1, r2, r3));
    } else if (example == "quad01-design") {
        j = oracle_json(oracle_quad01_design(alpha));
    } else if (example == "quad01-iboss") {
        j = json{{"example", "quad01-iboss"}, {"alpha", alpha},
                 {"det", oracle_quad01_iboss(alpha)}};
    } else if (example == "uniform-square") {
        j = oracle_json(oracle_uniform_square(alpha));
    } else if (example == "uniform-square-iboss") {
        j = json{{"example", "uniform-square-iboss"},
                 {"alpha", alpha},
                 {"m", matrix_json(uniform_square_iboss(alpha))}};
    } else {
        throw std::invalid_argument("unknown example: " + example);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int replicate_main(const RunOptions& opt, int reps) {
    RunConfig cfg = build_config(opt);
    ReplicationResult agg = run_replications(cfg, reps);
    json trajectory = json::array();
    for (std::size_t i = 0; i < agg.grid_k.size(); ++i) {
        trajectory.push_back(json{{"k", agg.grid_k[i]},
                                  {"mean_log10_err", agg.mean_log10_err[i]},
                                  {"mean_efficiency", agg.mean_eff[i]},
                                  {"sd_efficiency", agg.sd_eff[i]}});
    }
    json j{{"reps", agg.reps},
           {"mean_final_phi", agg.mean_final_phi},
           {"sd_final_phi", agg.sd_final_phi},
           {"final_phi", agg.final_phi},
           {"slope_last_decade", agg.slope_last_decade},
           {"trajectory", trajectory}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming design-optimal subsampling toolkit"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run_cmd = app.add_subcommand("run", "run one selection experiment");
    add_run_options(run_cmd, run_opt);

    std::string example;
    double oracle_alpha = 0.5;
    int oracle_dim = 2;
    double oracle_r1 = 3.0, oracle_r2 = 2.0, oracle_r3 = 1.0;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "print a ground-truth optimum");
    oracle_cmd
        ->add_option("example", example,
                     "quad-normal | multilinear-normal | mixture | three-spheres | "
                     "quad01-design | quad01-iboss | uniform-square | uniform-square-iboss")
        ->required();
    oracle_cmd->add_option("--alpha", oracle_alpha, "selection rate")->required();
    oracle_cmd->add_option("--dim", oracle_dim, "dimension where applicable");
    oracle_cmd->add_option("--r1", oracle_r1);
    oracle_cmd->add_option("--r2", oracle_r2);
    oracle_cmd->add_option("--r3", oracle_r3);

    RunOptions rep_opt;
    int reps = 1;
    CLI::App* rep_cmd = app.add_subcommand("replicate", "aggregate independent replications");
    rep_cmd->add_option("--reps", reps, "number of replications")->required();
    add_run_options(rep_cmd, rep_opt);

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed()) return run_main(run_opt);
        if (oracle_cmd->parsed()) {
            return oracle_main(example, oracle_alpha, oracle_dim, oracle_r1, oracle_r2,
                               oracle_r3);
        }
        return replicate_main(rep_opt, reps);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
