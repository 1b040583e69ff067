#pragma once

// The streaming selector: collect-then-run state machine that keeps a running
// information matrix on the slow 1/k time scale and an adaptive score
// threshold on the fast k^-q_exp scale, accepting candidates whose
// directional-derivative score clears the threshold.
//
// Modes:
//   FixedAlpha    - plain acceptance at rate alpha, no quota.
//   TruncateForce - hard quota n_target over horizon N: reject once the quota
//                   is met, select unconditionally once the remaining stream
//                   only just covers the deficit.
//   AdaptiveAlpha - TruncateForce plus alpha_k = (n_target - n_k)/(N - k)
//                   substituted for alpha in the threshold recursion.
//   ReplayPhase2  - second pass of the offline protocol: scores against a
//                   frozen matrix/threshold pair, no threshold updates.

#include "streamthin/criteria.hpp"
#include "streamthin/quantile.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace streamthin {

struct FixedAlpha {};
struct TruncateForce {
    long long n_target = 0;
    long long horizon = 0;
};
struct AdaptiveAlpha {
    long long n_target = 0;
    long long horizon = 0;
};
struct ReplayPhase2 {
    Eigen::MatrixXd frozen_m;
    double frozen_threshold = 0.0;
    long long n_target = 0;
    long long horizon = 0;
};
using ThinMode = std::variant<FixedAlpha, TruncateForce, AdaptiveAlpha, ReplayPhase2>;

struct ThinnerConfig {
    CriterionSpec criterion;
    QuantileConfig quantile;  // alpha is mirrored from `alpha` at construction
    double alpha = 0.5;
    ThinMode mode = FixedAlpha{};
    long long k0 = 0;    // initialization sample size; 0 = default 5p
    double eps1 = 0.0;   // forced-selection floor on n_k/k, must be << alpha
    std::uint64_t seed = 0;  // used by run_replay pass permutations
};

enum class Forced { None, Eps1Force, QuotaForceSelect, QuotaForceReject };

// Per-candidate outcome. score/threshold are NaN while collecting the
// initialization sample (no threshold exists yet). The raw score is recorded
// even when a forcing override decided the selection.
struct Decision {
    long long k = 0;
    bool selected = false;
    double score = 0.0;
    double threshold = 0.0;
    Forced forced = Forced::None;
    double phi_after = 0.0;
};

enum class Phase { Collecting, Running };

class Thinner {
public:
    explicit Thinner(ThinnerConfig cfg);

    Decision observe(const ElementaryInfo& e);

    Phase phase() const { return phase_; }
    long long seen() const { return k_; }
    long long n_selected() const { return info_.count; }
    double threshold() const;
    double phi() const { return phi_; }
    const InfoState& info() const { return info_; }
    const QuantileState& quantile_state() const { return quant_; }
    const ThinnerConfig& config() const { return cfg_; }

private:
    bool try_init();

    ThinnerConfig cfg_;
    InfoState info_;
    InfoState frozen_;  // ReplayPhase2 scoring matrix
    QuantileState quant_{};
    Phase phase_ = Phase::Collecting;
    long long k_ = 0;
    double phi_;
    std::vector<ElementaryInfo> init_buffer_{};
};

struct ReplayResult {
    Eigen::MatrixXd m;
    double threshold = 0.0;
};

// Phase 1 of the offline replay protocol: one FixedAlpha run (alpha should be
// n/N) over `passes` independently permuted copies of the dataset; the final
// matrix/threshold pair seeds a ReplayPhase2 thinner for the selection pass.
// permute=false replays the stored order every pass.
ReplayResult run_replay(const ThinnerConfig& cfg, const std::vector<ElementaryInfo>& data,
                        int passes, std::uint64_t seed, bool permute = true);

}  // namespace streamthin
