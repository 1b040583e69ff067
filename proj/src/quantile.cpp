#include "streamthin/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace streamthin {

void validate(const QuantileConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw std::invalid_argument("quantile alpha must lie in (0, 1)");
    }
    if (!(cfg.q_exp > 0.5 && cfg.q_exp <= 1.0)) {
        throw std::invalid_argument("q_exp must lie in (1/2, 1]");
    }
    if (!(cfg.gamma > 0.0 && cfg.gamma < cfg.q_exp - 0.5)) {
        throw std::invalid_argument("gamma must lie in (0, q_exp - 1/2)");
    }
    if (cfg.beta_floor < 0.0) throw std::invalid_argument("beta_floor must be >= 0");
    if (cfg.h_floor && !(*cfg.h_floor > 0.0)) {
        throw std::invalid_argument("h_floor must be > 0");
    }
}

QuantileState init_from_sample(const QuantileConfig& cfg, std::vector<double> scores) {
    validate(cfg);
    const long long k0 = static_cast<long long>(scores.size());
    if (k0 < 2) throw std::invalid_argument("quantile initialization needs at least 2 scores");
    std::sort(scores.begin(), scores.end());
    const auto ord = [&](long long i) {  // 1-based ascending order statistic
        return scores[static_cast<std::size_t>(std::clamp<long long>(i, 1, k0) - 1)];
    };
    const double a = cfg.alpha;
    // ceil((1-x) k0) written as k0 - floor(x k0); the 1e-9 nudge guards
    // against binary representation pushing an exact product below its value
    const auto from_tail = [&](double x) {
        return std::clamp<long long>(
            k0 - static_cast<long long>(std::floor(x * static_cast<double>(k0) + 1e-9)), 1, k0);
    };
    const long long idx_c = from_tail(a);
    const long long k_plus = from_tail(a / 2.0);
    const long long k_minus = std::max<long long>(
        static_cast<long long>(std::floor((1.0 - 1.5 * a) * static_cast<double>(k0) + 1e-9)), 1);

    QuantileState st;
    st.c_hat = ord(idx_c);
    st.beta0 = k_plus > k_minus
                   ? static_cast<double>(k0) / static_cast<double>(k_plus - k_minus)
                   : static_cast<double>(k0);
    const double floor_h =
        cfg.h_floor ? *cfg.h_floor : 1e-9 * std::max(1.0, std::abs(st.c_hat));
    st.h_base = std::max(ord(k_plus) - ord(k_minus), floor_h);
    st.k = k0;

    const double h_k0 = st.h_base / std::pow(static_cast<double>(k0), cfg.gamma);
    long long inside = 0;
    for (double z : scores) {
        if (std::abs(z - st.c_hat) <= h_k0) ++inside;
    }
    st.f_hat = static_cast<double>(inside) / (2.0 * static_cast<double>(k0) * h_k0);
    return st;
}

double beta(const QuantileState& st, const QuantileConfig& cfg, long long k) {
    const double cap = st.beta0 * std::pow(static_cast<double>(k), cfg.gamma);
    const double b = st.f_hat > 0.0 ? std::min(1.0 / st.f_hat, cap) : cap;
    return std::max(b, cfg.beta_floor);
}

void step(QuantileState& st, const QuantileConfig& cfg, double z) {
    step(st, cfg, z, cfg.alpha);
}

void step(QuantileState& st, const QuantileConfig& cfg, double z, double alpha) {
    if (!std::isfinite(z)) throw std::invalid_argument("quantile step: non-finite score");
    const long long k = st.k;
    const double gain = beta(st, cfg, k);
    const double decay = std::pow(static_cast<double>(k + 1), cfg.q_exp);
    const double c_prev = st.c_hat;
    st.c_hat = c_prev + gain / decay * ((z >= c_prev ? 1.0 : 0.0) - alpha);
    const double h_next = st.h_base / std::pow(static_cast<double>(k + 1), cfg.gamma);
    const double kernel = std::abs(z - c_prev) <= h_next ? 1.0 / (2.0 * h_next) : 0.0;
    st.f_hat += (kernel - st.f_hat) / decay;
    st.k = k + 1;
}

}  // namespace streamthin
