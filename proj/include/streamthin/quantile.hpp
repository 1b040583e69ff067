#pragma once

// Recursive tracking of the (1-alpha)-quantile of a drifting scalar score
// stream, together with the kernel density estimate at the quantile and the
// gain schedule that couples them. The quantile moves on the fast time scale
// k^-q_exp, deliberately slower-decaying than the 1/k matrix recursion it is
// paired with.

#include <optional>
#include <vector>

namespace streamthin {

struct QuantileConfig {
    double alpha = 0.5;    // upper-tail mass tracked: P(Z >= C) = alpha
    double q_exp = 0.625;  // step exponent, in (1/2, 1]
    double gamma = 0.1;    // gain/bandwidth exponent, in (0, q_exp - 1/2)
    double beta_floor = 0.0;  // lower clamp on the gain (0 = off)
    // Absolute floor for the bandwidth scale; when absent, initialization uses
    // 1e-9 * max(1, |c_hat|) so degenerate (constant) samples stay finite.
    std::optional<double> h_floor{};
};

void validate(const QuantileConfig& cfg);

struct QuantileState {
    double c_hat = 0.0;   // quantile estimate C_k
    double f_hat = 0.0;   // density estimate at the quantile, >= 0
    double beta0 = 1.0;   // gain scale fixed at initialization
    double h_base = 1.0;  // bandwidth scale; h_k = h_base / k^gamma
    long long k = 0;      // scores absorbed (starts at k0)
};

// Order-statistic initialization from the first k0 = scores.size() >= 2
// scores: c_hat is the ceil((1-alpha) k0)-th ascending order statistic, the
// bandwidth spans the (k0+, k0-) order statistics around it, beta0 their
// spacing rate, f_hat the boxcar density count at bandwidth h_base/k0^gamma.
QuantileState init_from_sample(const QuantileConfig& cfg, std::vector<double> scores);

// Gain beta_k = min{1/f_hat, beta0 * k^gamma}, floored at beta_floor; the
// zero-density branch returns the cap.
double beta(const QuantileState& st, const QuantileConfig& cfg, long long k);

// One coupled quantile/density step consuming the raw score z:
//   c_{k+1} = c_k + beta_k/(k+1)^q_exp * (1{z >= c_k} - alpha)
//   f_{k+1} = f_k + (k+1)^-q_exp * (1{|z - c_k| <= h_{k+1}}/(2 h_{k+1}) - f_k)
// Both indicators use the pre-update c_k. Throws on non-finite z (forced
// +-inf selection overrides must never reach the recursion).
void step(QuantileState& st, const QuantileConfig& cfg, double z);

// Same step with the tail mass alpha overridden (adaptive-alpha selection).
void step(QuantileState& st, const QuantileConfig& cfg, double z, double alpha);

}  // namespace streamthin
