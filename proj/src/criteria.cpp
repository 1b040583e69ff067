#include "streamthin/criteria.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace streamthin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_integer_power(double q) { return q > 0.0 && q == std::floor(q); }

// Inverse maintenance is worthwhile only where the score can be computed
// from M^-1 alone.
bool admits_maintenance(const CriterionSpec& spec) {
    return spec.kind == CriterionKind::LogDet ||
           (spec.kind == CriterionKind::NegTraceInvPow && is_integer_power(spec.power));
}

void check_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("matrix is not symmetric");
    }
}

void check_dim(const CriterionSpec& spec, Eigen::Index rows) {
    if (rows != spec.dim) throw std::invalid_argument("criterion/matrix dimension mismatch");
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    return es;
}

bool singular_eigs(const Eigen::VectorXd& ev) {
    const double emax = ev.maxCoeff();
    return emax <= 0.0 || ev.minCoeff() < kRcondSingular * emax;
}

}  // namespace

void validate(const CriterionSpec& spec) {
    if (spec.dim < 2) throw std::invalid_argument("criterion dimension must be >= 2");
    if (spec.kind == CriterionKind::NegTraceInvPow) {
        if (!(spec.power > -1.0) || spec.power == 0.0) {
            throw std::invalid_argument("NegTraceInvPow power must lie in (-1, inf), != 0");
        }
    }
}

Eigen::MatrixXd info_matrix(const ElementaryInfo& e) {
    if (const auto* r = std::get_if<RankOne>(&e)) {
        return r->weight * (r->f * r->f.transpose());
    }
    return std::get<Full>(e).m;
}

Eigen::Index info_dim(const ElementaryInfo& e) {
    if (const auto* r = std::get_if<RankOne>(&e)) return r->f.size();
    return std::get<Full>(e).m.rows();
}

double rcond(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    const Eigen::VectorXd ev = factorize(m).eigenvalues();
    const double emax = ev.maxCoeff();
    if (emax <= 0.0) return 0.0;
    return std::max(ev.minCoeff(), 0.0) / emax;
}

double phi(const CriterionSpec& spec, const Eigen::MatrixXd& m) {
    validate(spec);
    check_symmetric(m);
    check_dim(spec, m.rows());
    const Eigen::VectorXd ev = factorize(m).eigenvalues();
    if (singular_eigs(ev)) return -kInf;
    if (spec.kind == CriterionKind::LogDet) {
        return ev.array().log().sum();
    }
    return -ev.array().pow(-spec.power).sum();
}

Eigen::MatrixXd grad_phi(const CriterionSpec& spec, const Eigen::MatrixXd& m) {
    validate(spec);
    check_symmetric(m);
    check_dim(spec, m.rows());
    const auto es = factorize(m);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (singular_eigs(ev)) throw std::domain_error("grad_phi: singular information matrix");
    Eigen::VectorXd scale;
    if (spec.kind == CriterionKind::LogDet) {
        scale = ev.cwiseInverse();
    } else {
        scale = spec.power * ev.array().pow(-(spec.power + 1.0));
    }
    const Eigen::MatrixXd g =
        es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (g + g.transpose());
}

bool ensure_inverse(InfoState& state) {
    if (state.inv_valid) return true;
    state.m = 0.5 * (state.m + state.m.transpose()).eval();
    const auto es = factorize(state.m);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (singular_eigs(ev)) return false;
    const Eigen::MatrixXd inv =
        es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    state.m_inv = 0.5 * (inv + inv.transpose());
    state.inv_valid = true;
    state.since_refresh = 0;
    return true;
}

namespace {

// tr(M^-q) for integer q >= 1 from the maintained inverse.
double trace_inv_pow(const Eigen::MatrixXd& m_inv, int q) {
    if (q == 1) return m_inv.trace();
    if (q == 2) return m_inv.squaredNorm();  // tr(A^2) = ||A||_F^2 for symmetric A
    Eigen::MatrixXd p = m_inv;
    for (int j = 2; j < q; ++j) p = (p * m_inv).eval();
    return (p.cwiseProduct(m_inv)).sum();
}

}  // namespace

double dir_derivative(const CriterionSpec& spec, InfoState& state, const ElementaryInfo& e) {
    validate(spec);
    check_dim(spec, state.m.rows());
    if (info_dim(e) != spec.dim) throw std::invalid_argument("candidate dimension mismatch");
    if (!ensure_inverse(state)) throw std::domain_error("dir_derivative: singular information matrix");

    const int p = spec.dim;
    if (spec.kind == CriterionKind::LogDet) {
        if (const auto* r = std::get_if<RankOne>(&e)) {
            return r->weight * r->f.dot(state.m_inv * r->f) - p;
        }
        return (state.m_inv.cwiseProduct(std::get<Full>(e).m)).sum() - p;
    }
    const double q = spec.power;
    if (is_integer_power(q)) {
        const int qi = static_cast<int>(q);
        const double tr_q = trace_inv_pow(state.m_inv, qi);
        if (const auto* r = std::get_if<RankOne>(&e)) {
            Eigen::VectorXd v = r->f;
            for (int j = 0; j <= qi; ++j) v = (state.m_inv * v).eval();
            return q * (r->weight * r->f.dot(v) - tr_q);
        }
        Eigen::MatrixXd pw = state.m_inv;
        for (int j = 1; j <= qi; ++j) pw = (pw * state.m_inv).eval();
        return q * ((pw.cwiseProduct(std::get<Full>(e).m)).sum() - tr_q);
    }
    // non-integer power: spectral path
    const Eigen::MatrixXd g = grad_phi(spec, state.m);
    const Eigen::MatrixXd diff = info_matrix(e) - state.m;
    return (g.cwiseProduct(diff)).sum();
}

void select_update(const CriterionSpec& spec, InfoState& state, const ElementaryInfo& e) {
    validate(spec);
    if (state.m.rows() != spec.dim) throw std::invalid_argument("state dimension mismatch");
    if (info_dim(e) != spec.dim) throw std::invalid_argument("candidate dimension mismatch");

    const long long n = state.count;
    if (n == 0) {
        state.m = info_matrix(e);
        state.m = 0.5 * (state.m + state.m.transpose()).eval();
        state.count = 1;
        state.inv_valid = false;
        return;
    }

    const auto* r = std::get_if<RankOne>(&e);
    if (r != nullptr && admits_maintenance(spec) && state.inv_valid) {
        const Eigen::VectorXd v = state.m_inv * r->f;
        const double u = r->f.dot(v);
        const double denom = static_cast<double>(n) + r->weight * u;
        state.m += (r->weight * (r->f * r->f.transpose()) - state.m) / static_cast<double>(n + 1);
        if (denom > 0.0 && std::isfinite(denom)) {
            state.m_inv =
                (1.0 + 1.0 / static_cast<double>(n)) *
                (state.m_inv - (r->weight / denom) * (v * v.transpose()));
        } else {
            state.inv_valid = false;  // rank-one denominator underflow
        }
        state.count = n + 1;
        if (++state.since_refresh >= state.refresh_period) {
            state.inv_valid = false;
            ensure_inverse(state);
        }
        return;
    }

    state.m += (info_matrix(e) - state.m) / static_cast<double>(n + 1);
    state.m = 0.5 * (state.m + state.m.transpose()).eval();
    state.count = n + 1;
    state.inv_valid = false;
}

double d_efficiency(const CriterionSpec& spec, const Eigen::MatrixXd& m,
                    const Eigen::MatrixXd& m_star) {
    if (spec.kind != CriterionKind::LogDet) {
        throw std::invalid_argument("d_efficiency is defined for the LogDet criterion");
    }
    const double pm = phi(spec, m);
    const double ps = phi(spec, m_star);
    if (!std::isfinite(pm) || !std::isfinite(ps)) {
        throw std::domain_error("d_efficiency: singular input");
    }
    return std::exp((pm - ps) / spec.dim);
}

}  // namespace streamthin
