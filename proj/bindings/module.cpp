// Python bindings for the core operations: criterion evaluation, the
// streaming thinner, replay, scrambling, the comparison selectors, the
// ground-truth oracles and the experiment runner. Enum-ish knobs take the
// same strings as the CLI ("fixed"/"force"/"adaptive", "simplified"/"exact").

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "streamthin/baselines.hpp"
#include "streamthin/criteria.hpp"
#include "streamthin/harness.hpp"
#include "streamthin/oracles.hpp"
#include "streamthin/quantile.hpp"
#include "streamthin/rng.hpp"
#include "streamthin/scrambler.hpp"
#include "streamthin/thinner.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace streamthin;

namespace {

CriterionSpec make_criterion(const std::string& kind, double power, int dim) {
    CriterionSpec spec;
    if (kind == "logdet") spec.kind = CriterionKind::LogDet;
    else if (kind == "trace-inv-pow") spec.kind = CriterionKind::NegTraceInvPow;
    else throw std::invalid_argument("criterion must be 'logdet' or 'trace-inv-pow'");
    spec.power = power;
    spec.dim = dim;
    validate(spec);
    return spec;
}

QuotaMode parse_mode(const std::string& s) {
    if (s == "fixed") return QuotaMode::Fixed;
    if (s == "force") return QuotaMode::Force;
    if (s == "adaptive") return QuotaMode::Adaptive;
    throw std::invalid_argument("mode must be 'fixed', 'force' or 'adaptive'");
}

ExchangeRule parse_rule(const std::string& s) {
    if (s == "simplified") return ExchangeRule::Simplified;
    if (s == "exact") return ExchangeRule::Exact;
    throw std::invalid_argument("rule must be 'simplified' or 'exact'");
}

const char* forced_name(Forced f) {
    switch (f) {
        case Forced::None: return "none";
        case Forced::Eps1Force: return "eps1";
        case Forced::QuotaForceSelect: return "quota-select";
        case Forced::QuotaForceReject: return "quota-reject";
    }
    return "none";
}

ThinnerConfig build_thinner_config(int dim, double alpha, const std::string& criterion,
                                   double power, long long k0, double eps1,
                                   const std::string& mode, long long n_target,
                                   long long horizon, double q_exp, double gamma,
                                   double beta_floor, std::uint64_t seed) {
    ThinnerConfig cfg;
    cfg.criterion = make_criterion(criterion, power, dim);
    cfg.alpha = alpha;
    cfg.k0 = k0;
    cfg.eps1 = eps1;
    cfg.seed = seed;
    cfg.quantile.q_exp = q_exp;
    cfg.quantile.gamma = gamma;
    cfg.quantile.beta_floor = beta_floor;
    if (mode == "fixed") cfg.mode = FixedAlpha{};
    else if (mode == "force") cfg.mode = TruncateForce{n_target, horizon};
    else if (mode == "adaptive") cfg.mode = AdaptiveAlpha{n_target, horizon};
    else throw std::invalid_argument("mode must be 'fixed', 'force' or 'adaptive'");
    return cfg;
}

std::vector<ElementaryInfo> to_elementary(const std::vector<Eigen::VectorXd>& points,
                                          const std::vector<double>& weights) {
    if (!weights.empty() && weights.size() != points.size()) {
        throw std::invalid_argument("weights must be empty or match points");
    }
    std::vector<ElementaryInfo> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.push_back(RankOne{points[i], weights.empty() ? 1.0 : weights[i]});
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(streamthin, m) {
    m.doc() = "streaming design-point selection: criteria, thinner, baselines, oracles";

    // ---------------------------------------------------------- criteria
    m.def(
        "phi",
        [](const Eigen::MatrixXd& mat, const std::string& criterion, double power) {
            return phi(make_criterion(criterion, power, static_cast<int>(mat.rows())), mat);
        },
        py::arg("m"), py::arg("criterion") = "logdet", py::arg("power") = 1.0,
        "criterion value of a normalized information matrix");
    m.def(
        "grad_phi",
        [](const Eigen::MatrixXd& mat, const std::string& criterion, double power) {
            return grad_phi(make_criterion(criterion, power, static_cast<int>(mat.rows())),
                            mat);
        },
        py::arg("m"), py::arg("criterion") = "logdet", py::arg("power") = 1.0);
    m.def(
        "score",
        [](const Eigen::MatrixXd& mat, const Eigen::VectorXd& f, double weight,
           const std::string& criterion, double power) {
            InfoState st(static_cast<int>(mat.rows()));
            st.m = mat;
            st.count = 1;
            CriterionSpec spec = make_criterion(criterion, power, static_cast<int>(mat.rows()));
            return dir_derivative(spec, st, RankOne{f, weight});
        },
        py::arg("m"), py::arg("f"), py::arg("weight") = 1.0,
        py::arg("criterion") = "logdet", py::arg("power") = 1.0,
        "directional-derivative selection score of one candidate at matrix m");
    m.def(
        "d_efficiency",
        [](const Eigen::MatrixXd& mat, const Eigen::MatrixXd& m_star) {
            CriterionSpec spec{CriterionKind::LogDet, 1.0, static_cast<int>(mat.rows())};
            return d_efficiency(spec, mat, m_star);
        },
        py::arg("m"), py::arg("m_star"));

    // ---------------------------------------------------------- quantile
    py::class_<QuantileConfig>(m, "QuantileConfig")
        .def(py::init([](double alpha, double q_exp, double gamma, double beta_floor) {
                 QuantileConfig cfg;
                 cfg.alpha = alpha;
                 cfg.q_exp = q_exp;
                 cfg.gamma = gamma;
                 cfg.beta_floor = beta_floor;
                 validate(cfg);
                 return cfg;
             }),
             py::arg("alpha"), py::arg("q_exp") = 0.625, py::arg("gamma") = 0.1,
             py::arg("beta_floor") = 0.0)
        .def_readonly("alpha", &QuantileConfig::alpha)
        .def_readonly("q_exp", &QuantileConfig::q_exp)
        .def_readonly("gamma", &QuantileConfig::gamma)
        .def_readonly("beta_floor", &QuantileConfig::beta_floor);
    py::class_<QuantileState>(m, "QuantileState")
        .def_readonly("c_hat", &QuantileState::c_hat)
        .def_readonly("f_hat", &QuantileState::f_hat)
        .def_readonly("beta0", &QuantileState::beta0)
        .def_readonly("h_base", &QuantileState::h_base)
        .def_readonly("k", &QuantileState::k);
    m.def("quantile_init", &init_from_sample, py::arg("config"), py::arg("scores"),
          "order-statistic initialization from the first k0 scores");
    m.def(
        "quantile_step",
        [](QuantileState& st, const QuantileConfig& cfg, double z,
           std::optional<double> alpha) {
            if (alpha) step(st, cfg, z, *alpha);
            else step(st, cfg, z);
        },
        py::arg("state"), py::arg("config"), py::arg("z"), py::arg("alpha") = py::none(),
        "one coupled quantile/density update consuming the raw score z");

    // ----------------------------------------------------------- thinner
    py::class_<Decision>(m, "Decision")
        .def_readonly("k", &Decision::k)
        .def_readonly("selected", &Decision::selected)
        .def_readonly("score", &Decision::score)
        .def_readonly("threshold", &Decision::threshold)
        .def_readonly("phi_after", &Decision::phi_after)
        .def_property_readonly("forced",
                               [](const Decision& d) { return forced_name(d.forced); })
        .def("__repr__", [](const Decision& d) {
            return "Decision(k=" + std::to_string(d.k) +
                   ", selected=" + (d.selected ? "True" : "False") + ")";
        });

    py::class_<Thinner>(m, "Thinner")
        .def(py::init([](int dim, double alpha, const std::string& criterion, double power,
                         long long k0, double eps1, const std::string& mode,
                         long long n_target, long long horizon, double q_exp, double gamma,
                         double beta_floor, std::uint64_t seed) {
                 return Thinner(build_thinner_config(dim, alpha, criterion, power, k0, eps1,
                                                     mode, n_target, horizon, q_exp, gamma,
                                                     beta_floor, seed));
             }),
             py::arg("dim"), py::arg("alpha") = 0.5, py::arg("criterion") = "logdet",
             py::arg("power") = 1.0, py::arg("k0") = 0, py::arg("eps1") = 0.0,
             py::arg("mode") = "fixed", py::arg("n_target") = 0, py::arg("horizon") = 0,
             py::arg("q_exp") = 0.625, py::arg("gamma") = 0.1, py::arg("beta_floor") = 0.0,
             py::arg("seed") = 0)
        .def(
            "observe",
            [](Thinner& t, const Eigen::VectorXd& f, double weight) {
                return t.observe(RankOne{f, weight});
            },
            py::arg("f"), py::arg("weight") = 1.0)
        .def(
            "observe_full",
            [](Thinner& t, const Eigen::MatrixXd& mat) { return t.observe(Full{mat}); },
            py::arg("m"))
        .def_property_readonly("seen", &Thinner::seen)
        .def_property_readonly("n_selected", &Thinner::n_selected)
        .def_property_readonly("threshold", &Thinner::threshold)
        .def_property_readonly("phi", &Thinner::phi)
        .def_property_readonly("collecting",
                               [](const Thinner& t) { return t.phase() == Phase::Collecting; })
        .def_property_readonly("m", [](const Thinner& t) { return t.info().m; });

    m.def(
        "run_replay",
        [](const std::vector<Eigen::VectorXd>& points, double alpha, int passes,
           std::uint64_t seed, bool permute, const std::string& criterion, double power,
           long long k0, const std::vector<double>& weights) {
            if (points.empty()) throw std::invalid_argument("run_replay needs data");
            ThinnerConfig cfg;
            cfg.criterion =
                make_criterion(criterion, power, static_cast<int>(points.front().size()));
            cfg.alpha = alpha;
            cfg.k0 = k0;
            ReplayResult r = run_replay(cfg, to_elementary(points, weights), passes, seed,
                                        permute);
            return py::make_tuple(r.m, r.threshold);
        },
        py::arg("points"), py::arg("alpha"), py::arg("passes") = 1, py::arg("seed") = 1,
        py::arg("permute") = true, py::arg("criterion") = "logdet", py::arg("power") = 1.0,
        py::arg("k0") = 0, py::arg("weights") = std::vector<double>{},
        "multi-pass offline replay; returns the frozen (matrix, threshold) pair");

    // --------------------------------------------------------- scrambler
    m.def(
        "scramble_indices",
        [](std::size_t count, std::size_t capacity, std::uint64_t seed) {
            return scramble_indices(count, capacity, Rng(seed));
        },
        py::arg("count"), py::arg("capacity"), py::arg("seed") = 1,
        "buffer-randomized order of 0..count-1 as an exact permutation");

    // --------------------------------------------------------- baselines
    py::class_<Exchange>(m, "Exchange")
        .def(py::init([](int dim, long long n, const std::string& rule) {
                 return Exchange(dim, n, parse_rule(rule));
             }),
             py::arg("dim"), py::arg("n"), py::arg("rule") = "simplified")
        .def(
            "consider",
            [](Exchange& ex, const Eigen::VectorXd& f, double weight) {
                return ex.consider(f, weight);
            },
            py::arg("f"), py::arg("weight") = 1.0)
        .def_property_readonly("seen", &Exchange::seen)
        .def_property_readonly("size", &Exchange::size)
        .def_property_readonly("capacity", &Exchange::capacity)
        .def_property_readonly("full", &Exchange::full)
        .def_property_readonly("phi", &Exchange::phi)
        .def_property_readonly("active", [](const Exchange& ex) {
            std::vector<Eigen::VectorXd> out;
            out.reserve(ex.active().size());
            for (const auto& r : ex.active()) out.push_back(r.f);
            return out;
        });

    m.def(
        "iboss_select",
        [](const std::vector<Eigen::VectorXd>& points, long long n) {
            return iboss_select(points, n);
        },
        py::arg("points"), py::arg("n"),
        "extreme-coordinate subsample; returns n distinct indices");

    py::class_<MarginalSpec>(m, "MarginalSpec")
        .def_readonly("mean", &MarginalSpec::mean)
        .def_readonly("second_moment", &MarginalSpec::second_moment);
    m.def("normal_marginal", &normal_marginal, py::arg("mu") = 0.0, py::arg("sigma") = 1.0);
    m.def("uniform_marginal", &uniform_marginal, py::arg("lo"), py::arg("hi"));
    m.def(
        "v_iboss_asymptotic",
        [](const MarginalSpec& marginal, double alpha, int d) {
            return v_iboss_asymptotic(marginal, alpha, d);
        },
        py::arg("marginal"), py::arg("alpha"), py::arg("d"),
        "limiting second-moment matrix of the extreme-coordinate subsample");

    // ----------------------------------------------------------- oracles
    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("example", &OracleResult::example)
        .def_readonly("alpha", &OracleResult::alpha)
        .def_readonly("phi_star", &OracleResult::phi_star)
        .def_readonly("c_star", &OracleResult::c_star)
        .def_readonly("m_star", &OracleResult::m_star)
        .def_readonly("region", &OracleResult::region)
        .def_readonly("region_names", &OracleResult::region_names)
        .def("__repr__", [](const OracleResult& r) {
            return "OracleResult(" + r.example + ", alpha=" + std::to_string(r.alpha) +
                   ", phi_star=" + std::to_string(r.phi_star) + ")";
        });
    m.def("oracle_quad_normal", &oracle_quad_normal, py::arg("alpha"));
    m.def("oracle_multilinear_normal", &oracle_multilinear_normal, py::arg("alpha"),
          py::arg("d"));
    m.def("multilinear_rho_quadrature", &multilinear_rho_quadrature, py::arg("alpha"),
          py::arg("d"));
    m.def("oracle_mixture_normal_discrete", &oracle_mixture_normal_discrete,
          py::arg("alpha"));
    m.def("oracle_three_spheres", &oracle_three_spheres, py::arg("alpha"), py::arg("d") = 3,
          py::arg("r1") = 3.0, py::arg("r2") = 2.0, py::arg("r3") = 1.0);
    m.def("oracle_quad01_iboss", &oracle_quad01_iboss, py::arg("alpha"));
    m.def("oracle_quad01_design", &oracle_quad01_design, py::arg("alpha"));
    m.def("oracle_uniform_square", &oracle_uniform_square, py::arg("alpha"));
    m.def("uniform_square_iboss", &uniform_square_iboss, py::arg("alpha"));

    // ----------------------------------------------------------- harness
    py::class_<ProbeRecord>(m, "ProbeRecord")
        .def_readonly("k", &ProbeRecord::k)
        .def_readonly("phi", &ProbeRecord::phi)
        .def_readonly("err_fro", &ProbeRecord::err_fro)
        .def_readonly("efficiency", &ProbeRecord::efficiency);
    py::class_<RunSummary>(m, "RunSummary")
        .def_readonly("n_seen", &RunSummary::n_seen)
        .def_readonly("n_selected", &RunSummary::n_selected)
        .def_readonly("alpha_effective", &RunSummary::alpha_effective)
        .def_readonly("final_phi", &RunSummary::final_phi)
        .def_readonly("final_threshold", &RunSummary::final_threshold)
        .def_readonly("runtime_sec", &RunSummary::runtime_sec)
        .def_readonly("final_m", &RunSummary::final_m)
        .def_readonly("d_eff", &RunSummary::d_eff)
        .def_readonly("probes", &RunSummary::probes)
        .def_readonly("selected_raw", &RunSummary::selected_raw)
        .def("__repr__", [](const RunSummary& s) {
            return "RunSummary(n_selected=" + std::to_string(s.n_selected) +
                   ", final_phi=" + std::to_string(s.final_phi) + ")";
        });
    py::class_<ReplicationResult>(m, "ReplicationResult")
        .def_readonly("reps", &ReplicationResult::reps)
        .def_readonly("final_phi", &ReplicationResult::final_phi)
        .def_readonly("mean_final_phi", &ReplicationResult::mean_final_phi)
        .def_readonly("sd_final_phi", &ReplicationResult::sd_final_phi)
        .def_readonly("grid_k", &ReplicationResult::grid_k)
        .def_readonly("mean_log10_err", &ReplicationResult::mean_log10_err)
        .def_readonly("mean_eff", &ReplicationResult::mean_eff)
        .def_readonly("sd_eff", &ReplicationResult::sd_eff)
        .def_readonly("slope_last_decade", &ReplicationResult::slope_last_decade);

    auto build_run_config = [](const std::string& stream, long long n_total,
                               std::uint64_t seed, const std::string& method, double alpha,
                               long long n, const std::string& mode,
                               long long scramble_buffer, const std::string& trace_path,
                               const std::string& oracle, double eps1, long long k0,
                               double q_exp, double gamma, double beta_floor,
                               const std::string& exchange_rule, bool keep_selected,
                               int probe_count) {
        RunConfig cfg;
        cfg.stream = parse_stream_spec(stream);
        cfg.stream.n_total = n_total;
        cfg.stream.seed = seed;
        if (method == "thinner") cfg.method = Method::Thinner;
        else if (method == "exchange") cfg.method = Method::Exchange;
        else if (method == "iboss") cfg.method = Method::Iboss;
        else throw std::invalid_argument("method must be 'thinner', 'exchange' or 'iboss'");
        cfg.alpha = alpha;
        cfg.n = n;
        cfg.mode = parse_mode(mode);
        cfg.scramble_buffer = scramble_buffer;
        cfg.trace_path = trace_path;
        cfg.oracle = oracle;
        cfg.eps1 = eps1;
        cfg.k0 = k0;
        cfg.q_exp = q_exp;
        cfg.gamma = gamma;
        cfg.beta_floor = beta_floor;
        cfg.exchange_rule = parse_rule(exchange_rule);
        cfg.keep_selected = keep_selected;
        cfg.probe_count = probe_count;
        return cfg;
    };

    m.def(
        "run",
        [build_run_config](const std::string& stream, long long n_total, std::uint64_t seed,
                           const std::string& method, double alpha, long long n,
                           const std::string& mode, long long scramble_buffer,
                           const std::string& trace_path, const std::string& oracle,
                           double eps1, long long k0, double q_exp, double gamma,
                           double beta_floor, const std::string& exchange_rule,
                           bool keep_selected, int probe_count) {
            return run_experiment(build_run_config(
                stream, n_total, seed, method, alpha, n, mode, scramble_buffer, trace_path,
                oracle, eps1, k0, q_exp, gamma, beta_floor, exchange_rule, keep_selected,
                probe_count));
        },
        py::arg("stream"), py::arg("n_total"), py::arg("seed") = 1,
        py::arg("method") = "thinner", py::arg("alpha") = 0.5, py::arg("n") = 0,
        py::arg("mode") = "fixed", py::arg("scramble_buffer") = 0,
        py::arg("trace_path") = "", py::arg("oracle") = "", py::arg("eps1") = 0.0,
        py::arg("k0") = 0, py::arg("q_exp") = 0.625, py::arg("gamma") = 0.1,
        py::arg("beta_floor") = 0.0, py::arg("exchange_rule") = "simplified",
        py::arg("keep_selected") = false, py::arg("probe_count") = 200,
        "run one selection experiment; stream strings as in the CLI, e.g. 'normal:d=5'");

    m.def(
        "replicate",
        [build_run_config](const std::string& stream, long long n_total, int reps,
                           std::uint64_t seed, const std::string& method, double alpha,
                           long long n, const std::string& mode, long long scramble_buffer,
                           const std::string& oracle, double eps1, long long k0,
                           double q_exp, double gamma, double beta_floor,
                           const std::string& exchange_rule, int probe_count) {
            return run_replications(
                build_run_config(stream, n_total, seed, method, alpha, n, mode,
                                 scramble_buffer, "", oracle, eps1, k0, q_exp, gamma,
                                 beta_floor, exchange_rule, false, probe_count),
                reps);
        },
        py::arg("stream"), py::arg("n_total"), py::arg("reps"), py::arg("seed") = 1,
        py::arg("method") = "thinner", py::arg("alpha") = 0.5, py::arg("n") = 0,
        py::arg("mode") = "fixed", py::arg("scramble_buffer") = 0, py::arg("oracle") = "",
        py::arg("eps1") = 0.0, py::arg("k0") = 0, py::arg("q_exp") = 0.625,
        py::arg("gamma") = 0.1, py::arg("beta_floor") = 0.0,
        py::arg("exchange_rule") = "simplified", py::arg("probe_count") = 200,
        "aggregate independent replications of one configuration");

    m.def("emit_histogram", &emit_histogram, py::arg("points"), py::arg("bandwidth") = 0.0,
          "Epanechnikov density table over an even grid as (x, density) pairs");
}
