#include "streamthin/baselines.hpp"

#include "streamthin/numerics.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace streamthin {

Exchange::Exchange(int dim, long long n, ExchangeRule rule)
    : dim_(dim), n_(n), rule_(rule), info_(dim) {
    if (dim < 1) throw std::invalid_argument("exchange needs dim >= 1");
    if (n < dim) throw std::invalid_argument("exchange needs n >= dim");
    active_.reserve(static_cast<std::size_t>(n));
    leverage_.reserve(static_cast<std::size_t>(n));
}

double Exchange::phi() const {
    return streamthin::phi(CriterionSpec{CriterionKind::LogDet, 1.0, dim_}, info_.m);
}

void Exchange::rebuild_scores() {
    leverage_.resize(active_.size());
    for (std::size_t i = 0; i < active_.size(); ++i) {
        leverage_[i] = active_[i].f.dot(info_.m_inv * active_[i].f);
    }
}

bool Exchange::consider(const Eigen::VectorXd& f, double weight) {
    if (f.size() != dim_) throw std::invalid_argument("candidate dimension mismatch");
    ++k_;
    const double nn = static_cast<double>(n_);

    if (size() < n_) {
        active_.push_back(RankOne{f, weight});
        info_.m += (weight * (f * f.transpose()) - info_.m) / static_cast<double>(active_.size());
        info_.count = size();
        info_.inv_valid = false;
        if (full() && ensure_inverse(info_)) rebuild_scores();
        return true;
    }

    if (!info_.inv_valid && !ensure_inverse(info_)) {
        // Degenerate start (first n points rank-deficient): force fresh points
        // in round-robin until the matrix becomes regular.
        std::size_t slot = static_cast<std::size_t>(k_ % n_);
        const RankOne out = active_[slot];
        active_[slot] = RankOne{f, weight};
        info_.m += (weight * (f * f.transpose()) - out.weight * (out.f * out.f.transpose())) / nn;
        info_.m = ((info_.m + info_.m.transpose()) / 2.0).eval();
        info_.inv_valid = false;
        if (ensure_inverse(info_)) rebuild_scores();
        return true;
    }
    if (leverage_.size() != active_.size()) rebuild_scores();

    // Membership means a zero-gain swap, skip.
    for (const auto& r : active_) {
        if (r.weight == weight && r.f == f) return false;
    }

    const Eigen::VectorXd v = info_.m_inv * f;
    const double u = f.dot(v);

    std::size_t best = active_.size();
    if (rule_ == ExchangeRule::Simplified) {
        // Swap in iff the candidate's leverage beats the weakest active point.
        double worst = u;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            if (leverage_[i] < worst) {
                worst = leverage_[i];
                best = i;
            }
        }
    } else {
        // Determinant ratio of replacing point i (weight b) with f (weight a):
        //   (1 + a u / n)(1 - b v_i / n) + a b w_i^2 / n^2,  w_i = f' M^-1 f_i.
        // Accept the largest ratio when it exceeds 1.
        double best_ratio = 1.0;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const double a = weight;
            const double b = active_[i].weight;
            const double w = active_[i].f.dot(v);
            const double ratio = (1.0 + a * u / nn) * (1.0 - b * leverage_[i] / nn) +
                                 a * b * w * w / (nn * nn);
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best = i;
            }
        }
    }
    if (best == active_.size()) return false;

    const RankOne out = active_[best];
    active_[best] = RankOne{f, weight};
    info_.m += (weight * (f * f.transpose()) - out.weight * (out.f * out.f.transpose())) / nn;
    info_.m = ((info_.m + info_.m.transpose()) / 2.0).eval();

    // Inverse maintenance: add f then remove the outgoing point, two
    // rank-one corrections. Fall back to factorization periodically and
    // whenever a correction denominator degenerates.
    bool inv_ok = false;
    ++info_.since_refresh;
    if (info_.since_refresh < info_.refresh_period) {
        const double denom1 = 1.0 + weight * u / nn;
        if (denom1 > 1e-12) {
            Eigen::MatrixXd inv1 =
                info_.m_inv - (weight / (nn * denom1)) * (v * v.transpose());
            const Eigen::VectorXd v1 = inv1 * out.f;
            const double denom2 = 1.0 - out.weight * out.f.dot(v1) / nn;
            if (denom2 > 1e-12) {
                inv1 += (out.weight / (nn * denom2)) * (v1 * v1.transpose());
                info_.m_inv = ((inv1 + inv1.transpose()) / 2.0).eval();
                inv_ok = true;
            }
        }
    }
    if (!inv_ok) {
        info_.inv_valid = false;
        if (!ensure_inverse(info_)) {
            // Only the Simplified rule can accept a singularity-inducing swap;
            // undo it.
            active_[best] = out;
            info_.m +=
                (out.weight * (out.f * out.f.transpose()) - weight * (f * f.transpose())) / nn;
            info_.m = ((info_.m + info_.m.transpose()) / 2.0).eval();
            info_.inv_valid = false;
            ensure_inverse(info_);
            return false;
        }
    }
    rebuild_scores();
    return true;
}

std::vector<std::size_t> iboss_select(const std::vector<Eigen::VectorXd>& points, long long n) {
    const long long total = static_cast<long long>(points.size());
    if (n < 0 || n > total) throw std::invalid_argument("iboss: need 0 <= n <= N");
    if (n == 0) return {};
    const int d = static_cast<int>(points.front().size());
    for (const auto& x : points) {
        if (x.size() != d) throw std::invalid_argument("iboss: ragged point dimensions");
    }

    const long long pairs = n / 2;
    const long long base = pairs / d;
    const long long extra_pairs = pairs % d;
    const bool odd = (n % 2) != 0;

    std::vector<char> alive(points.size(), 1);
    std::vector<std::size_t> selected;
    selected.reserve(static_cast<std::size_t>(n));

    std::vector<std::size_t> order(points.size());
    for (int c = 0; c < d; ++c) {
        long long r = base + (c < extra_pairs ? 1 : 0);
        long long big = r + ((odd && c == d - 1) ? 1 : 0);
        long long small = r;
        if (big == 0 && small == 0) continue;

        order.clear();
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (alive[i]) order.push_back(i);
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double xa = points[a](c), xb = points[b](c);
            if (xa != xb) return xa < xb;
            return a < b;
        });

        for (long long j = 0; j < big; ++j) {
            std::size_t idx = order[order.size() - 1 - static_cast<std::size_t>(j)];
            selected.push_back(idx);
            alive[idx] = 0;
        }
        for (long long j = 0; j < small; ++j) {
            std::size_t idx = order[static_cast<std::size_t>(j)];
            selected.push_back(idx);
            alive[idx] = 0;
        }
    }
    return selected;
}

MarginalSpec normal_marginal(double mu, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("normal marginal needs sigma > 0");
    boost::math::normal_distribution<double> dist(mu, sigma);
    MarginalSpec spec;
    spec.mean = mu;
    spec.second_moment = mu * mu + sigma * sigma;
    spec.quantile = [dist](double t) { return boost::math::quantile(dist, t); };
    spec.pdf = [dist](double x) { return boost::math::pdf(dist, x); };
    return spec;
}

MarginalSpec uniform_marginal(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform marginal needs lo < hi");
    MarginalSpec spec;
    spec.mean = (lo + hi) / 2.0;
    spec.second_moment = (hi * hi + hi * lo + lo * lo) / 3.0;
    spec.quantile = [lo, hi](double t) { return lo + t * (hi - lo); };
    spec.pdf = [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 / (hi - lo) : 0.0; };
    return spec;
}

Eigen::MatrixXd v_iboss_asymptotic(const std::vector<MarginalSpec>& marginals, double alpha) {
    const int d = static_cast<int>(marginals.size());
    if (d < 1) throw std::invalid_argument("need at least one marginal");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    const double dd = static_cast<double>(d);

    // Per coordinate k (1-based): the retained middle band is
    // [q(t_k), q(1-t_k)] with t_k = alpha / (2 (d - (k-1) alpha)).
    std::vector<double> s(d), m(d), pi(d), pi_over_1ma(d);
    for (int k = 1; k <= d; ++k) {
        const auto& mg = marginals[k - 1];
        if (!mg.quantile || !mg.pdf) throw std::invalid_argument("marginal needs quantile and pdf");
        const double denom_t = dd - (k - 1) * alpha;
        const double t = alpha / (2.0 * denom_t);
        const double lo = mg.quantile(t);
        const double hi = mg.quantile(1.0 - t);
        if (hi > lo) {
            s[k - 1] = integrate([&mg](double x) { return x * x * mg.pdf(x); }, lo, hi);
            m[k - 1] = integrate([&mg](double x) { return x * mg.pdf(x); }, lo, hi);
        } else {
            s[k - 1] = 0.0;
            m[k - 1] = 0.0;
        }
        if (k == d) {
            // (1-alpha) cancels against d - d alpha; this form is exact for
            // every alpha and avoids 0/0 at alpha = 1.
            pi[k - 1] = (dd - (d - 1) * alpha) / dd;
        } else {
            pi[k - 1] = (1.0 - alpha) * denom_t / (dd - k * alpha);
            pi_over_1ma[k - 1] = denom_t / (dd - k * alpha);
        }
    }

    Eigen::MatrixXd v(d, d);
    for (int i = 0; i < d; ++i) {
        v(i, i) = (marginals[i].second_moment - pi[i] * s[i]) / alpha;
        for (int j = i + 1; j < d; ++j) {
            // pi_i pi_j / (1-alpha): divide the (1-alpha) out of the factor
            // with the smaller index (only k = d lacks an explicit one).
            double cross = pi_over_1ma[i] * pi[j] * m[i] * m[j];
            double off = (marginals[i].mean * marginals[j].mean - cross) / alpha;
            v(i, j) = off;
            v(j, i) = off;
        }
    }
    return v;
}

Eigen::MatrixXd v_iboss_asymptotic(const MarginalSpec& marginal, double alpha, int d) {
    return v_iboss_asymptotic(std::vector<MarginalSpec>(static_cast<std::size_t>(d), marginal),
                              alpha);
}

}  // namespace streamthin
