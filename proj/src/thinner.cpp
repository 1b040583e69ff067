#include "streamthin/thinner.hpp"

#include "streamthin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace streamthin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

long long quota_of(const ThinMode& mode) {
    if (const auto* t = std::get_if<TruncateForce>(&mode)) return t->n_target;
    if (const auto* a = std::get_if<AdaptiveAlpha>(&mode)) return a->n_target;
    if (const auto* r = std::get_if<ReplayPhase2>(&mode)) return r->n_target;
    return -1;
}

long long horizon_of(const ThinMode& mode) {
    if (const auto* t = std::get_if<TruncateForce>(&mode)) return t->horizon;
    if (const auto* a = std::get_if<AdaptiveAlpha>(&mode)) return a->horizon;
    if (const auto* r = std::get_if<ReplayPhase2>(&mode)) return r->horizon;
    return -1;
}

void validate_mode(const ThinnerConfig& cfg) {
    long long n = quota_of(cfg.mode);
    long long N = horizon_of(cfg.mode);
    if (n < 0) return;  // FixedAlpha
    if (n <= 0 || N <= 0) throw std::invalid_argument("quota mode needs n_target > 0 and horizon > 0");
    if (n > N) throw std::invalid_argument("quota exceeds horizon");
}

}  // namespace

Thinner::Thinner(ThinnerConfig cfg) : cfg_(std::move(cfg)), phi_(-kInf) {
    validate(cfg_.criterion);
    cfg_.quantile.alpha = cfg_.alpha;
    validate(cfg_.quantile);
    validate_mode(cfg_);
    const int p = cfg_.criterion.dim;
    if (cfg_.k0 <= 0) cfg_.k0 = 5LL * p;
    if (cfg_.k0 < p) throw std::invalid_argument("k0 must be at least the matrix dimension");
    if (cfg_.eps1 < 0.0) throw std::invalid_argument("eps1 must be non-negative");
    if (cfg_.eps1 >= cfg_.alpha) throw std::invalid_argument("eps1 must be below alpha");
    info_ = InfoState(p);

    if (auto* r = std::get_if<ReplayPhase2>(&cfg_.mode)) {
        frozen_ = InfoState(p);
        frozen_.m = r->frozen_m;
        if (!ensure_inverse(frozen_)) throw std::invalid_argument("frozen matrix is singular");
        frozen_.count = 1;  // scores use the normalized matrix as-is
        phase_ = Phase::Running;
        quant_.c_hat = r->frozen_threshold;
    } else {
        init_buffer_.reserve(static_cast<std::size_t>(cfg_.k0));
    }
}

double Thinner::threshold() const {
    return phase_ == Phase::Running ? quant_.c_hat : kNaN;
}

// End of collection: average the buffered sample into M, score the buffer
// against it, and seed the threshold recursion from those scores' order
// statistics. A singular sample matrix keeps us collecting.
bool Thinner::try_init() {
    const int p = cfg_.criterion.dim;
    InfoState cand(p);
    for (const auto& e : init_buffer_) {
        cand.m += info_matrix(e);
    }
    cand.m /= static_cast<double>(init_buffer_.size());
    cand.count = static_cast<long long>(init_buffer_.size());
    if (!ensure_inverse(cand)) return false;

    std::vector<double> scores;
    scores.reserve(init_buffer_.size());
    for (const auto& e : init_buffer_) {
        scores.push_back(dir_derivative(cfg_.criterion, cand, e));
    }
    quant_ = init_from_sample(cfg_.quantile, scores);

    info_ = cand;
    phi_ = streamthin::phi(cfg_.criterion, info_.m);
    phase_ = Phase::Running;
    init_buffer_.clear();
    init_buffer_.shrink_to_fit();
    return true;
}

Decision Thinner::observe(const ElementaryInfo& e) {
    if (info_dim(e) != cfg_.criterion.dim) {
        throw std::invalid_argument("candidate dimension mismatch");
    }
    {
        long long N = horizon_of(cfg_.mode);
        if (N >= 0 && k_ >= N) throw std::runtime_error("observe past the configured horizon");
    }
    ++k_;
    Decision d;
    d.k = k_;
    // Forcing below compares against the pre-observe counters: kp candidates
    // were processed before this one, n_k of them selected.
    const long long kp = k_ - 1;

    if (phase_ == Phase::Collecting) {
        init_buffer_.push_back(e);
        ++info_.count;  // everything is selected while collecting
        d.selected = true;
        d.score = kNaN;
        d.threshold = kNaN;
        if (static_cast<long long>(init_buffer_.size()) >= cfg_.k0) {
            try_init();  // a singular sample matrix keeps us collecting
        }
        d.phi_after = phi_;
        return d;
    }

    if (auto* rp = std::get_if<ReplayPhase2>(&cfg_.mode)) {
        // Second pass: frozen scoring, quota bookkeeping only.
        double z = dir_derivative(cfg_.criterion, frozen_, e);
        d.score = z;
        d.threshold = rp->frozen_threshold;
        long long n_k = info_.count;
        if (n_k >= rp->n_target) {
            d.selected = false;
            d.forced = Forced::QuotaForceReject;
        } else if (rp->n_target - n_k >= rp->horizon - kp) {
            d.selected = true;
            d.forced = Forced::QuotaForceSelect;
        } else {
            d.selected = z > rp->frozen_threshold;
        }
        if (d.selected) {
            select_update(cfg_.criterion, info_, e);
            phi_ = streamthin::phi(cfg_.criterion, info_.m);
        }
        d.phi_after = phi_;
        return d;
    }

    // Raw score against the running matrix; the threshold recursion always
    // consumes this value, whatever forcing decides below.
    double z_raw = dir_derivative(cfg_.criterion, info_, e);
    d.score = z_raw;
    d.threshold = quant_.c_hat;
    const double c_pre = quant_.c_hat;

    long long n_k = info_.count;
    double z_eff = z_raw;
    if (cfg_.eps1 > 0.0 &&
        static_cast<double>(n_k) < cfg_.eps1 * static_cast<double>(kp)) {
        z_eff = kInf;
        d.forced = Forced::Eps1Force;
    }
    long long quota = quota_of(cfg_.mode);
    long long N = horizon_of(cfg_.mode);
    if (quota >= 0) {
        if (n_k >= quota) {
            z_eff = -kInf;
            d.forced = Forced::QuotaForceReject;
        } else if (quota - n_k >= N - kp) {
            z_eff = kInf;
            d.forced = Forced::QuotaForceSelect;
        }
    }

    d.selected = z_eff >= c_pre;

    double alpha_k = cfg_.alpha;
    if (std::holds_alternative<AdaptiveAlpha>(cfg_.mode)) {
        // N - kp > 0 here: past-horizon observes were rejected above.
        double rem = static_cast<double>(N - kp);
        double deficit = static_cast<double>(quota - n_k);
        alpha_k = std::clamp(deficit / rem, 0.0, 1.0);
    }
    step(quant_, cfg_.quantile, z_raw, alpha_k);

    if (d.selected) {
        select_update(cfg_.criterion, info_, e);
        phi_ = streamthin::phi(cfg_.criterion, info_.m);
    }
    d.phi_after = phi_;
    return d;
}

ReplayResult run_replay(const ThinnerConfig& cfg, const std::vector<ElementaryInfo>& data,
                        int passes, std::uint64_t seed, bool permute) {
    if (data.empty()) throw std::invalid_argument("replay needs a non-empty dataset");
    if (passes < 1) throw std::invalid_argument("replay needs at least one pass");

    ThinnerConfig pass1 = cfg;
    pass1.mode = FixedAlpha{};
    Thinner thinner(pass1);

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int pass = 0; pass < passes; ++pass) {
        if (permute) {
            Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(pass));
            fisher_yates(order, rng);
        }
        for (std::size_t idx : order) {
            thinner.observe(data[idx]);
        }
    }
    if (thinner.phase() != Phase::Running) {
        throw std::runtime_error("replay pass 1 never initialized; dataset too small or degenerate");
    }
    return ReplayResult{thinner.info().m, thinner.quantile_state().c_hat};
}

}  // namespace streamthin
