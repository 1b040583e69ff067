#pragma once

// Design criteria over normalized information matrices: Phi and its gradient,
// the per-candidate directional derivative (the selection score), and the
// running-average matrix state with a maintained inverse.
//
// Criteria: LogDet is Phi(M) = log det M; NegTraceInvPow is
// Phi(M) = -tr(M^-q) for q in (-1, inf), q != 0. Both are -inf on singular M.

#include <Eigen/Dense>

#include <variant>

namespace streamthin {

enum class CriterionKind { LogDet, NegTraceInvPow };

struct CriterionSpec {
    CriterionKind kind = CriterionKind::LogDet;
    double power = 1.0;  // q, NegTraceInvPow only
    int dim = 2;         // p >= 2
};

void validate(const CriterionSpec& spec);

// Elementary information contribution of one candidate.
// RankOne is M(x) = weight * f f^T (weight > 0 is the per-observation Fisher
// information for location); Full is any symmetric PSD matrix.
struct RankOne {
    Eigen::VectorXd f;
    double weight = 1.0;
};
struct Full {
    Eigen::MatrixXd m;
};
using ElementaryInfo = std::variant<RankOne, Full>;

Eigen::MatrixXd info_matrix(const ElementaryInfo& e);
Eigen::Index info_dim(const ElementaryInfo& e);

// Matrices with reciprocal condition estimate below this are singular.
inline constexpr double kRcondSingular = 1e-12;

// Running average M of the selected candidates' elementary matrices.
// Invariants: m symmetric PSD; when inv_valid, ||m * m_inv - I||_F <= 1e-8
// (kept by re-factorizing every refresh_period selections); count equals the
// number of selections averaged into m.
struct InfoState {
    Eigen::MatrixXd m;
    Eigen::MatrixXd m_inv;
    bool inv_valid = false;
    long long count = 0;
    int refresh_period = 1024;
    int since_refresh = 0;

    explicit InfoState(int p = 0)
        : m(Eigen::MatrixXd::Zero(p, p)), m_inv(Eigen::MatrixXd::Zero(p, p)) {}
};

// Reciprocal condition estimate of a symmetric matrix (eigenvalue ratio);
// 0 when not positive definite.
double rcond(const Eigen::MatrixXd& m);

double phi(const CriterionSpec& spec, const Eigen::MatrixXd& m);

// Gradient of Phi at nonsingular m: M^-1 for LogDet, q M^-(q+1) otherwise.
// Throws on singular input.
Eigen::MatrixXd grad_phi(const CriterionSpec& spec, const Eigen::MatrixXd& m);

// Makes state.m_inv a valid inverse of state.m; false when m is singular.
bool ensure_inverse(InfoState& state);

// F_Phi(M, M(x)) = tr[grad Phi(M) (M(x) - M)]. For LogDet with a rank-one
// candidate this is weight * f^T M^-1 f - p, computed from the maintained
// inverse without forming the gradient. Throws on singular m.
double dir_derivative(const CriterionSpec& spec, InfoState& state, const ElementaryInfo& e);

// M <- M + (M(x) - M)/(count + 1); count++. Rank-one input keeps m_inv
// current through the Sherman-Morrison update when the criterion admits it
// (LogDet, integer-power NegTraceInvPow); otherwise the inverse is marked
// stale and re-factorized on demand.
void select_update(const CriterionSpec& spec, InfoState& state, const ElementaryInfo& e);

// exp[(Phi(m) - Phi(m_star))/p] = [det(m)/det(m_star)]^(1/p); LogDet only.
double d_efficiency(const CriterionSpec& spec, const Eigen::MatrixXd& m,
                    const Eigen::MatrixXd& m_star);

}  // namespace streamthin
