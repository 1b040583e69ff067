#pragma once

// Comparison selectors: a fixed-size sequential exchange that keeps the n
// points maximizing log det, and batch IBOSS extreme-coordinate selection
// together with its asymptotic second-moment matrix.

#include "streamthin/criteria.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace streamthin {

// Swap acceptance rule. Exact evaluates the determinant ratio of the
// candidate swap (guarantees log det never decreases); Simplified compares
// leverage scores f'M^-1 f only, which ignores an O(1/n) cross term and can
// very occasionally accept a slightly det-decreasing swap.
enum class ExchangeRule { Simplified, Exact };

class Exchange {
public:
    Exchange(int dim, long long n, ExchangeRule rule = ExchangeRule::Simplified);

    // Feeds one candidate regression vector. The first n candidates fill the
    // active set unconditionally; afterwards the best single swap is taken
    // when the rule accepts it. Returns true when the active set changed.
    bool consider(const Eigen::VectorXd& f, double weight = 1.0);

    long long seen() const { return k_; }
    long long size() const { return static_cast<long long>(active_.size()); }
    long long capacity() const { return n_; }
    bool full() const { return size() == n_; }
    const std::vector<RankOne>& active() const { return active_; }
    const InfoState& info() const { return info_; }
    // log det of the normalized matrix; -inf until the active set spans R^p.
    double phi() const;

private:
    void rebuild_scores();

    int dim_;
    long long n_;
    ExchangeRule rule_;
    long long k_ = 0;
    std::vector<RankOne> active_;
    std::vector<double> leverage_;  // f_i' M^-1 f_i cache, one per active point
    InfoState info_;
};

// Extreme-coordinate subsampling: processes coordinates in order, removing
// the selected points as it goes; per coordinate takes the block of largest
// values first, then the same number of smallest. n/2 pairs are spread over
// the d coordinates, leading coordinates absorbing the remainder; an odd n
// puts one extra point on the last coordinate's large side. Returns exactly
// n distinct indices in selection order.
std::vector<std::size_t> iboss_select(const std::vector<Eigen::VectorXd>& points, long long n);

// One coordinate's distribution, enough to evaluate the asymptotic matrix:
// plain moments plus quantile function and density for the truncated-moment
// integrals.
struct MarginalSpec {
    double mean = 0.0;
    double second_moment = 1.0;
    std::function<double(double)> quantile;  // t in (0,1), monotone
    std::function<double(double)> pdf;
};

MarginalSpec normal_marginal(double mu = 0.0, double sigma = 1.0);
MarginalSpec uniform_marginal(double lo, double hi);

// Limit of the selected-sample second-moment matrix (1/n) sum x x' under
// IBOSS with independent coordinates, d = marginals.size():
//   V_kk   = [ E[x_k^2] - pi_k s_k(t_k) ] / alpha
//   V_kk'  = [ E[x_k]E[x_k'] - pi_k pi_k' m_k m_k' / (1-alpha) ] / alpha
// with pi_k = (1-alpha)(d-(k-1)alpha)/(d-k alpha), t_k = alpha/(2(d-(k-1)alpha)),
// and s_k/m_k the x^2/x moments of the density between q_k(t_k), q_k(1-t_k).
// Evaluated in a form that stays finite at alpha = 1.
Eigen::MatrixXd v_iboss_asymptotic(const std::vector<MarginalSpec>& marginals, double alpha);
Eigen::MatrixXd v_iboss_asymptotic(const MarginalSpec& marginal, double alpha, int d);

}  // namespace streamthin
