#pragma once

// Experiment runner: wires a stream (optionally scrambled) into one of the
// selectors, writes per-candidate traces, attaches oracles for efficiency
// reporting, and aggregates independent replications.

#include "streamthin/baselines.hpp"
#include "streamthin/criteria.hpp"
#include "streamthin/oracles.hpp"
#include "streamthin/streams.hpp"
#include "streamthin/thinner.hpp"

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace streamthin {

enum class Method { Thinner, Exchange, Iboss };
enum class QuotaMode { Fixed, Force, Adaptive };

struct RunConfig {
    StreamSpec stream;
    Method method = Method::Thinner;
    double alpha = 0.5;     // selection rate; ignored when n > 0
    long long n = 0;        // selection quota; 0 derives floor(alpha N) where needed
    QuotaMode mode = QuotaMode::Fixed;
    long long scramble_buffer = 0;  // <= 1 disables scrambling
    std::string trace_path;         // empty = no trace file
    std::string oracle;             // oracle name, empty = none
    // thinner knobs
    double eps1 = 0.0;
    long long k0 = 0;  // 0 = default
    double q_exp = 0.625;
    double gamma = 0.1;
    double beta_floor = 0.0;
    // exchange knob
    ExchangeRule exchange_rule = ExchangeRule::Simplified;
    // reporting
    bool keep_selected = false;  // collect selected raw points
    int probe_count = 200;       // trajectory snapshots (geometric k grid)
};

struct ProbeRecord {
    long long k = 0;
    double phi = -std::numeric_limits<double>::infinity();
    // ||M_k - M*||_F and D-efficiency; NaN without an oracle (or while M_k is
    // still singular).
    double err_fro = std::numeric_limits<double>::quiet_NaN();
    double efficiency = std::numeric_limits<double>::quiet_NaN();
};

struct RunSummary {
    Method method = Method::Thinner;
    long long n_seen = 0;
    long long n_selected = 0;
    double alpha_effective = 0.0;
    double final_phi = -std::numeric_limits<double>::infinity();
    double final_threshold = std::numeric_limits<double>::quiet_NaN();
    double runtime_sec = 0.0;
    Eigen::MatrixXd final_m;
    std::optional<OracleResult> oracle;
    std::optional<double> d_eff;
    std::vector<ProbeRecord> probes;
    std::vector<Eigen::VectorXd> selected_raw;  // filled when keep_selected
};

// Resolves an oracle by name ("quad-normal", "multilinear-normal", "mixture",
// "three-spheres", "quad01-design", "uniform-square"), taking dimensions and
// radii from the stream spec where the example needs them.
OracleResult oracle_for(const std::string& name, double alpha, const StreamSpec& stream);

RunSummary run_experiment(const RunConfig& cfg);

struct ReplicationResult {
    int reps = 0;
    std::vector<double> final_phi;
    double mean_final_phi = 0.0;
    double sd_final_phi = 0.0;
    std::vector<long long> grid_k;
    std::vector<double> mean_log10_err;  // mean over reps of log10 ||M_k - M*||_F
    std::vector<double> mean_eff;
    std::vector<double> sd_eff;
    // Least-squares slope of mean_log10_err against log10 k over the last
    // decade of k; NaN when no oracle matrix is available.
    double slope_last_decade = std::numeric_limits<double>::quiet_NaN();
};

// Runs `reps` independent replications (seeds derived from the base seed) in
// parallel and aggregates the probe trajectories.
ReplicationResult run_replications(const RunConfig& base, int reps);

// Epanechnikov kernel density table over an even grid; bandwidth 0 picks
// range/1000. Returns (x, density) pairs integrating to 1.
std::vector<std::pair<double, double>> emit_histogram(const std::vector<double>& points,
                                                      double bandwidth = 0.0);
void write_histogram(const std::string& path,
                     const std::vector<std::pair<double, double>>& table);

}  // namespace streamthin
