#include <doctest.h>

#include "streamthin/harness.hpp"
#include "streamthin/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace streamthin;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TraceRow {
    long long k;
    int selected;
    long long n_k;
    double score, threshold, phi;
};

std::vector<TraceRow> parse_trace(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "k,selected,n_k,score,threshold,phi");
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        TraceRow r;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        r.k = std::stoll(cell);
        std::getline(ls, cell, ',');
        r.selected = std::stoi(cell);
        std::getline(ls, cell, ',');
        r.n_k = std::stoll(cell);
        std::getline(ls, cell, ',');
        r.score = std::stod(cell);
        std::getline(ls, cell, ',');
        r.threshold = std::stod(cell);
        std::getline(ls, cell, ',');
        r.phi = std::stod(cell);
        rows.push_back(r);
    }
    return rows;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

RunConfig quad_cfg(long long n_total, double alpha, std::uint64_t seed) {
    RunConfig cfg;
    cfg.stream = parse_stream_spec("quad-normal");
    cfg.stream.n_total = n_total;
    cfg.stream.seed = seed;
    cfg.alpha = alpha;
    return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("oracle lookup by name, with stream-derived parameters") {
    StreamSpec normal5 = parse_stream_spec("normal:d=5");
    OracleResult r = oracle_for("multilinear-normal", 0.3, normal5);
    CHECK(r.example == "multilinear-normal");
    CHECK(r.m_star->rows() == 5);

    StreamSpec spheres = parse_stream_spec("three-spheres:d=5,r1=4,r2=2,r3=1");
    r = oracle_for("three-spheres", 0.5, spheres);
    CHECK(r.region[0] == 4.0);
    CHECK(r.m_star->rows() == 5);

    CHECK(oracle_for("quad-normal", 0.5, normal5).example == "quad-normal");
    CHECK(oracle_for("mixture", 0.5, normal5).example == "mixture-normal-discrete");
    CHECK(oracle_for("quad01-design", 0.5, normal5).example == "quad01-design");
    CHECK(oracle_for("uniform-square", 0.5, normal5).example == "uniform-square");

    StreamSpec quad = parse_stream_spec("quad-normal");
    CHECK_THROWS_AS(oracle_for("multilinear-normal", 0.3, quad), std::invalid_argument);
    CHECK_THROWS_AS(oracle_for("cauchy", 0.3, normal5), std::invalid_argument);
}

TEST_CASE("an oracle whose matrix does not fit the model is rejected") {
    RunConfig cfg;
    cfg.stream = parse_stream_spec("normal:d=2");
    cfg.stream.n_total = 1000;
    cfg.oracle = "quad-normal";  // 3x3 matrix against a 2-dim model
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("summary internals agree with each other and with the trace") {
    const auto trace_file = temp_path("streamthin_trace_main.csv");
    RunConfig cfg = quad_cfg(20000, 0.5, 11);
    cfg.oracle = "quad-normal";
    cfg.trace_path = trace_file.string();
    cfg.keep_selected = true;

    RunSummary sum = run_experiment(cfg);
    CHECK(sum.n_seen == 20000);
    CHECK(sum.alpha_effective == 0.5);
    CHECK(sum.runtime_sec > 0.0);
    REQUIRE(sum.oracle.has_value());
    REQUIRE(sum.final_m.rows() == 3);

    // the reported criterion value is the criterion of the reported matrix
    CriterionSpec crit{CriterionKind::LogDet, 1.0, 3};
    CHECK(std::abs(sum.final_phi - phi(crit, sum.final_m)) <= 1e-9);

    // the kept raw points rebuild that matrix exactly
    REQUIRE(static_cast<long long>(sum.selected_raw.size()) == sum.n_selected);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    for (const auto& raw : sum.selected_raw) {
        Eigen::Vector3d f(1.0, raw(0), raw(0) * raw(0));
        m += f * f.transpose();
    }
    m /= static_cast<double>(sum.n_selected);
    CHECK((m - sum.final_m).norm() <= 1e-9);

    REQUIRE(sum.d_eff.has_value());
    CHECK(*sum.d_eff > 0.8);
    CHECK(*sum.d_eff < 1.05);

    // probe trajectory: strictly increasing k, ends at the horizon, efficiency
    // at the end is the summary efficiency
    REQUIRE_FALSE(sum.probes.empty());
    for (std::size_t i = 1; i < sum.probes.size(); ++i) {
        CHECK(sum.probes[i].k > sum.probes[i - 1].k);
    }
    CHECK(sum.probes.back().k == 20000);
    CHECK(std::abs(sum.probes.back().efficiency - *sum.d_eff) <= 1e-12);
    CHECK(std::isfinite(sum.probes.back().err_fro));

    // trace agrees row by row with the summary counters
    auto rows = parse_trace(slurp(trace_file));
    REQUIRE(static_cast<long long>(rows.size()) == 20000);
    long long cum = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].k == static_cast<long long>(i) + 1);
        cum += rows[i].selected;
        REQUIRE(rows[i].n_k == cum);
    }
    CHECK(cum == sum.n_selected);
    CHECK(rows.back().phi == doctest::Approx(sum.final_phi).epsilon(1e-12));
    // each trace row records the threshold the decision was made against;
    // the summary reports the value after the final update, one step later
    CHECK(std::abs(rows.back().threshold - sum.final_threshold) < 0.01);

    std::filesystem::remove(trace_file);
}

TEST_CASE("identical configurations yield byte-identical traces") {
    for (long long buffer : {0LL, 16LL}) {
        CAPTURE(buffer);
        const auto pa = temp_path("streamthin_trace_a.csv");
        const auto pb = temp_path("streamthin_trace_b.csv");
        RunConfig cfg = quad_cfg(5000, 0.3, 23);
        cfg.scramble_buffer = buffer;
        cfg.trace_path = pa.string();
        run_experiment(cfg);
        cfg.trace_path = pb.string();
        run_experiment(cfg);
        CHECK(slurp(pa) == slurp(pb));
        std::filesystem::remove(pa);
        std::filesystem::remove(pb);
    }
}

TEST_CASE("scrambling rescues a time-ordered stream") {
    RunConfig cfg;
    cfg.stream = parse_stream_spec("ramp");
    cfg.stream.n_total = 20000;
    cfg.stream.seed = 3;
    cfg.alpha = 0.1;

    auto rate = [](const RunSummary& s) {
        return static_cast<double>(s.n_selected) / static_cast<double>(s.n_seen);
    };

    // On the ordered ramp the score distribution drifts faster than the
    // threshold recursion can track it and the realized rate collapses.
    RunSummary plain = run_experiment(cfg);
    CHECK(plain.n_seen == 20000);
    CHECK(std::abs(rate(plain) - 0.1) > 0.03);

    // A buffer of alpha N already restores the nominal rate ...
    cfg.scramble_buffer = 2000;
    RunSummary buffered = run_experiment(cfg);
    CHECK(std::abs(rate(buffered) - 0.1) <= 0.01);

    // ... and a stream-length buffer (a near-uniform permutation) also beats
    // the ordered run on the criterion itself.
    cfg.scramble_buffer = 20000;
    RunSummary shuffled = run_experiment(cfg);
    CHECK(std::abs(rate(shuffled) - 0.1) <= 0.01);
    CHECK(shuffled.final_phi > plain.final_phi);
}

TEST_CASE("most of the selection lands inside the oracle region") {
    RunConfig cfg = quad_cfg(20000, 0.5, 29);
    cfg.oracle = "quad-normal";
    cfg.keep_selected = true;
    RunSummary sum = run_experiment(cfg);
    const double a = sum.oracle->region[0];
    const double b = sum.oracle->region[1];
    long long inside = 0;
    for (const auto& raw : sum.selected_raw) {
        const double x = std::abs(raw(0));
        if (x >= a - 0.03 || x <= b + 0.03) ++inside;
    }
    const double frac =
        static_cast<double>(inside) / static_cast<double>(sum.selected_raw.size());
    CHECK(frac >= 0.95);
}

TEST_CASE("selection rate stays near the target and never beats the bound by much") {
    RunConfig cfg = quad_cfg(100000, 0.5, 31);
    cfg.oracle = "quad-normal";
    RunSummary sum = run_experiment(cfg);
    const double rate = static_cast<double>(sum.n_selected) / static_cast<double>(sum.n_seen);
    CHECK(std::abs(rate - 0.5) <= 0.02);
    CHECK(sum.final_phi <= sum.oracle->phi_star + 0.02);
}

TEST_CASE("histogram: unit mass, correct peak, input validation") {
    auto table = emit_histogram({1.5}, 0.1);
    double mass = 0.0;
    double peak_x = 0.0, peak_d = -1.0;
    const double step = table[1].first - table[0].first;
    for (const auto& [x, d] : table) {
        mass += d * step;
        if (d > peak_d) {
            peak_d = d;
            peak_x = x;
        }
    }
    CHECK(std::abs(mass - 1.0) <= 1e-3);
    CHECK(std::abs(peak_x - 1.5) <= step);
    CHECK(peak_d == doctest::Approx(7.5));  // 0.75 / h at the sample point

    Rng rng(4);
    std::vector<double> u;
    for (int i = 0; i < 5000; ++i) u.push_back(rng.uniform());
    table = emit_histogram(u);
    mass = 0.0;
    const double ustep = table[1].first - table[0].first;
    for (const auto& [x, d] : table) mass += d * ustep;
    CHECK(std::abs(mass - 1.0) <= 1e-3);

    CHECK_THROWS_AS(emit_histogram({}), std::invalid_argument);
    CHECK_THROWS_AS(emit_histogram({2.0, 2.0, 2.0}), std::invalid_argument);
    CHECK_NOTHROW(emit_histogram({2.0, 2.0, 2.0}, 0.5));

    const auto hp = temp_path("streamthin_hist.csv");
    write_histogram(hp.string(), {{0.0, 1.0}, {0.5, 0.25}});
    std::istringstream in(slurp(hp));
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,density");
    std::getline(in, line);
    CHECK(line == "0,1");
    std::filesystem::remove(hp);
}

TEST_CASE("one replication is exactly one seeded run") {
    RunConfig base = quad_cfg(5000, 0.5, 101);
    base.oracle = "quad-normal";
    ReplicationResult agg = run_replications(base, 1);
    REQUIRE(agg.reps == 1);
    REQUIRE(agg.final_phi.size() == 1);
    CHECK(agg.sd_final_phi == 0.0);

    RunConfig single = base;
    single.stream.seed = derive_seed(base.stream.seed, 0);
    RunSummary one = run_experiment(single);
    CHECK(agg.mean_final_phi == one.final_phi);
    REQUIRE(agg.grid_k.size() == one.probes.size());
    for (std::size_t j = 0; j < agg.grid_k.size(); ++j) {
        CHECK(agg.grid_k[j] == one.probes[j].k);
        // early probes can predate a nonsingular matrix: NaN on both sides
        if (std::isnan(one.probes[j].efficiency)) {
            CHECK(std::isnan(agg.mean_eff[j]));
        } else {
            CHECK(agg.mean_eff[j] == one.probes[j].efficiency);
        }
    }
    CHECK(std::isfinite(agg.slope_last_decade));

    CHECK_THROWS_AS(run_replications(base, 0), std::invalid_argument);
}

TEST_CASE("replication bands shrink as the budget grows") {
    RunConfig base;
    base.stream = parse_stream_spec("normal:d=2");
    base.stream.n_total = 20000;
    base.stream.seed = 7;
    base.oracle = "multilinear-normal";

    base.alpha = 0.1;
    ReplicationResult sparse = run_replications(base, 16);
    base.alpha = 0.4;
    ReplicationResult dense = run_replications(base, 16);

    REQUIRE_FALSE(sparse.sd_eff.empty());
    REQUIRE_FALSE(dense.sd_eff.empty());
    CHECK(dense.sd_eff.back() < sparse.sd_eff.back());

    // matrix error decays along the trajectory and its fitted slope is negative
    CHECK(sparse.mean_log10_err.back() < sparse.mean_log10_err.front());
    CHECK(sparse.slope_last_decade < 0.0);
    CHECK(sparse.slope_last_decade > -1.5);
}

TEST_CASE("exchange through the runner") {
    RunConfig cfg;
    cfg.stream = parse_stream_spec("normal:d=3");
    cfg.stream.n_total = 5000;
    cfg.stream.seed = 13;
    cfg.method = Method::Exchange;
    cfg.n = 30;
    cfg.oracle = "multilinear-normal";

    RunSummary sum = run_experiment(cfg);
    CHECK(sum.n_seen == 5000);
    CHECK(sum.n_selected == 30);
    CHECK(sum.alpha_effective == doctest::Approx(30.0 / 5000.0));
    CHECK(std::isnan(sum.final_threshold));
    CriterionSpec crit{CriterionKind::LogDet, 1.0, 3};
    CHECK(std::abs(sum.final_phi - phi(crit, sum.final_m)) <= 1e-9);
    REQUIRE(sum.d_eff.has_value());
    CHECK(*sum.d_eff > 0.5);  // picks the extreme tail, can exceed 1
}

TEST_CASE("batch extreme-coordinate selection through the runner") {
    RunConfig cfg;
    cfg.stream = parse_stream_spec("uniform:d=2");
    cfg.stream.n_total = 100000;
    cfg.stream.seed = 19;
    cfg.method = Method::Iboss;
    cfg.alpha = 0.1;
    cfg.oracle = "uniform-square";

    RunSummary sum = run_experiment(cfg);
    CHECK(sum.n_selected == 10000);
    CriterionSpec crit{CriterionKind::LogDet, 1.0, 3};
    CHECK(std::abs(sum.final_phi - phi(crit, sum.final_m)) <= 1e-9);
    REQUIRE(sum.d_eff.has_value());
    CHECK(*sum.d_eff < 1.0);  // strictly worse than the optimal design here
    CHECK(*sum.d_eff > 0.6);
    REQUIRE(sum.probes.size() == 1);
    CHECK(sum.probes.front().k == 100000);
    CHECK(std::isfinite(sum.probes.front().err_fro));
}

TEST_CASE("quota modes hit their target exactly through the runner") {
    for (QuotaMode mode : {QuotaMode::Force, QuotaMode::Adaptive}) {
        CAPTURE(static_cast<int>(mode));
        RunConfig cfg = quad_cfg(2000, 0.5, 37);
        cfg.n = 300;
        cfg.mode = mode;
        RunSummary sum = run_experiment(cfg);
        CHECK(sum.n_selected == 300);
        CHECK(sum.alpha_effective == doctest::Approx(0.15));
    }
    RunConfig cfg = quad_cfg(2000, 0.5, 37);
    cfg.n = 300;
    cfg.mode = QuotaMode::Fixed;
    RunSummary sum = run_experiment(cfg);
    CHECK(std::abs(static_cast<double>(sum.n_selected) - 300.0) < 100.0);
}

}  // TEST_SUITE
