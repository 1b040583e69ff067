#pragma once

// Ground-truth optima for the analyzed example distributions: the best
// normalized information matrix attainable by any selection rule keeping a
// fraction alpha of the stream, its criterion value, and the acceptance
// threshold (the score shared by all boundary points of the optimal region).
// Used by tests and by efficiency reporting.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace streamthin {

struct OracleResult {
    std::string example;
    double alpha = 0.0;
    double phi_star = 0.0;  // log det of the optimal normalized matrix
    double c_star = 0.0;    // boundary score threshold, always <= 0
    std::optional<Eigen::MatrixXd> m_star;
    // Example-specific scalars (region radii, interval endpoints, weights),
    // parallel to region_names.
    std::vector<double> region;
    std::vector<std::string> region_names;
};

// Scalar x ~ N(0,1), features (1, x, x^2). Optimal region is
// (-inf,-a] u [-b,b] u [a,inf); a and b solve the mass and equal-score
// equations by nested bisection over quadrature moments.
OracleResult oracle_quad_normal(double alpha);

// x ~ N(0, I_d), features x. Optimal region {|x| >= R}, matrix rho * I_d.
// d = 2 uses the closed forms R = sqrt(-2 ln alpha), rho = 1 - ln alpha.
OracleResult oracle_multilinear_normal(double alpha, int d);
// Quadrature evaluation of rho for cross-checking the closed forms.
double multilinear_rho_quadrature(double alpha, int d);

// Half N(0, I_2), half uniform on the circle of radius sqrt(2). Closed-form
// three-branch solution (branch points 1/(2e) and 1/(2e) + 1/2).
OracleResult oracle_mixture_normal_discrete(double alpha);

// Equal mixture of uniform distributions on three nested spheres in R^d.
// Fills spheres outside-in; closed form in all three branches.
OracleResult oracle_three_spheres(double alpha, int d, double r1, double r2, double r3);

// x ~ U[0,1], features (x, x^2), no intercept.
// Determinant of the limiting extreme-coordinate (IBOSS) selection matrix:
//   det = alpha^2 (alpha^4 - 8 alpha^3 + 26 alpha^2 - 40 alpha + 25) / 960.
double oracle_quad01_iboss(double alpha);
// The optimal design for the same setting: a middle interval around 1/2 plus
// a right-edge interval, merging into the single interval [1-alpha, 1] for
// alpha above roughly 0.754.
OracleResult oracle_quad01_design(double alpha);

// x ~ U[-1,1]^2, features (1, x1, x2). Optimal matrix diag{1, rho, rho} with
// rho from the corners region {|x| >= R}; two branches split at
// alpha = 1 - pi/4 (R reaching the edge midpoints).
OracleResult oracle_uniform_square(double alpha);
// Limiting IBOSS matrix for the same setting: diag{1, D1, D2} with
// D1 = (8 - 5a + a^2)/12, D2 = (8 - 11a + 4a^2)/(3 (2-a)^2).
Eigen::MatrixXd uniform_square_iboss(double alpha);

}  // namespace streamthin
