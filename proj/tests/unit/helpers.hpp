#pragma once

#include "streamthin/criteria.hpp"
#include "streamthin/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <initializer_list>
#include <vector>

namespace testutil {

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) f(i++) = x;
    return f;
}

inline streamthin::ElementaryInfo rank1(std::initializer_list<double> xs, double w = 1.0) {
    return streamthin::RankOne{vec(xs), w};
}

inline streamthin::ElementaryInfo rank1(const Eigen::VectorXd& f, double w = 1.0) {
    return streamthin::RankOne{f, w};
}

inline Eigen::VectorXd normal_vec(int d, streamthin::Rng& rng) {
    Eigen::VectorXd f(d);
    for (int i = 0; i < d; ++i) f(i) = rng.normal();
    return f;
}

inline std::vector<streamthin::ElementaryInfo> normal_rank1s(int d, long long n,
                                                             std::uint64_t seed) {
    streamthin::Rng rng(seed);
    std::vector<streamthin::ElementaryInfo> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) out.push_back(streamthin::RankOne{normal_vec(d, rng), 1.0});
    return out;
}

// Random well-conditioned SPD matrix.
inline Eigen::MatrixXd random_spd(int p, streamthin::Rng& rng) {
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
    Eigen::MatrixXd m = a * a.transpose() / static_cast<double>(p);
    m += 0.3 * Eigen::MatrixXd::Identity(p, p);
    return (m + m.transpose()).eval() / 2.0;
}

inline Eigen::MatrixXd random_symmetric(int p, streamthin::Rng& rng) {
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
    return (a + a.transpose()).eval() / 2.0;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace testutil
