#include "streamthin/oracles.hpp"

#include "streamthin/numerics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace streamthin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_alpha_open(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
}

void require_alpha_closed(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
}

}  // namespace

OracleResult oracle_quad_normal(double alpha) {
    require_alpha_open(alpha);
    boost::math::normal_distribution<double> nd;
    auto tail1 = [&](double a) { return boost::math::cdf(boost::math::complement(nd, a)); };

    // Region (-inf,-a] u [-b,b] u [a,inf); b follows from a via the mass
    // condition 2 tail1(a) + (2 Phi(b) - 1) = alpha.
    auto b_of = [&](double a) {
        double arg = 0.5 + alpha / 2.0 - tail1(a);
        if (arg < 0.5) arg = 0.5;
        if (arg >= 1.0) arg = std::nextafter(1.0, 0.0);
        return boost::math::quantile(nd, arg);
    };
    auto moment = [&](double a, double b, int j) {
        auto g = [&nd, j](double x) {
            double xj = 1.0;
            for (int i = 0; i < j; ++i) xj *= x;
            return xj * boost::math::pdf(nd, x);
        };
        double tails = 2.0 * integrate(g, a, kInf);
        double mid = b > 0.0 ? 2.0 * integrate(g, 0.0, b) : 0.0;
        return (tails + mid) / alpha;
    };
    auto matrix_of = [&](double a, double b) {
        Eigen::Matrix3d m;
        double m0 = moment(a, b, 0);
        double m2 = moment(a, b, 2);
        double m4 = moment(a, b, 4);
        m << m0, 0.0, m2, 0.0, m2, 0.0, m2, 0.0, m4;
        return m;
    };
    auto score = [](const Eigen::Matrix3d& m_inv, double x) {
        Eigen::Vector3d f(1.0, x, x * x);
        return f.dot(m_inv * f);
    };
    // Optimality: the two region boundary points carry equal scores.
    auto residual = [&](double a) {
        double b = b_of(a);
        Eigen::Matrix3d m_inv = matrix_of(a, b).inverse();
        return score(m_inv, a) - score(m_inv, b);
    };

    double a_min = boost::math::quantile(nd, 1.0 - alpha / 2.0);
    double lo = a_min + 1e-7, hi = 8.5;
    if (!find_bracket(residual, lo, hi, 64)) {
        throw std::runtime_error("quad-normal oracle: no bracket for the boundary equation");
    }
    double a = bisect(residual, lo, hi);
    double b = b_of(a);

    Eigen::Matrix3d m = matrix_of(a, b);
    Eigen::Matrix3d m_inv = m.inverse();
    OracleResult res;
    res.example = "quad-normal";
    res.alpha = alpha;
    res.phi_star = std::log(m.determinant());
    res.c_star = score(m_inv, a) - 3.0;
    res.m_star = m;
    res.region = {a, b};
    res.region_names = {"a", "b"};
    return res;
}

double multilinear_rho_quadrature(double alpha, int d) {
    boost::math::chi_squared_distribution<double> chi2(static_cast<double>(d));
    double c = boost::math::quantile(boost::math::complement(chi2, alpha));
    double second = integrate(
        [&chi2](double t) { return t * boost::math::pdf(chi2, t); }, c, kInf);
    return second / (static_cast<double>(d) * alpha);
}

OracleResult oracle_multilinear_normal(double alpha, int d) {
    require_alpha_open(alpha);
    if (d < 2) throw std::invalid_argument("multilinear oracle needs d >= 2");
    double r2, rho;
    if (d == 2) {
        r2 = -2.0 * std::log(alpha);
        rho = 1.0 - std::log(alpha);
    } else {
        boost::math::chi_squared_distribution<double> chi2(static_cast<double>(d));
        r2 = boost::math::quantile(boost::math::complement(chi2, alpha));
        rho = multilinear_rho_quadrature(alpha, d);
    }
    OracleResult res;
    res.example = "multilinear-normal";
    res.alpha = alpha;
    res.phi_star = d * std::log(rho);
    res.c_star = r2 / rho - d;
    res.m_star = rho * Eigen::MatrixXd::Identity(d, d);
    res.region = {std::sqrt(r2), rho};
    res.region_names = {"R", "rho"};
    return res;
}

OracleResult oracle_mixture_normal_discrete(double alpha) {
    require_alpha_closed(alpha);
    const double b1 = 1.0 / (2.0 * std::numbers::e);
    const double b2 = b1 + 0.5;
    double rho, r;
    if (alpha <= b1) {
        // Normal tail only, boundary radius above the atom circle.
        rho = 1.0 - std::log(2.0 * alpha);
        r = std::sqrt(-2.0 * std::log(2.0 * alpha));
    } else if (alpha <= b2) {
        // Full normal tail beyond sqrt(2) plus part of the atom.
        rho = 1.0 + 1.0 / (2.0 * std::numbers::e * alpha);
        r = std::sqrt(2.0);
    } else {
        // Whole atom plus a normal tail reaching inside the circle.
        double s = 2.0 * alpha - 1.0;
        rho = 1.0 - s * std::log(s) / (2.0 * alpha);
        r = std::sqrt(-2.0 * std::log(s));
    }
    OracleResult res;
    res.example = "mixture-normal-discrete";
    res.alpha = alpha;
    res.phi_star = 2.0 * std::log(rho);
    res.c_star = r * r / rho - 2.0;
    res.m_star = rho * Eigen::MatrixXd::Identity(2, 2);
    res.region = {r, rho};
    res.region_names = {"r", "rho"};
    return res;
}

OracleResult oracle_three_spheres(double alpha, int d, double r1, double r2, double r3) {
    require_alpha_closed(alpha);
    if (d < 1) throw std::invalid_argument("three-spheres oracle needs d >= 1");
    if (!(r1 > r2 && r2 > r3 && r3 > 0.0)) {
        throw std::invalid_argument("three-spheres oracle needs r1 > r2 > r3 > 0");
    }
    const double dd = static_cast<double>(d);
    double diag, rb, w1, w2, w3;
    if (alpha <= 1.0 / 3.0) {
        diag = r1 * r1 / dd;
        rb = r1;
        w1 = 1.0;
        w2 = w3 = 0.0;
    } else if (alpha <= 2.0 / 3.0) {
        diag = (r1 * r1 / 3.0 + (alpha - 1.0 / 3.0) * r2 * r2) / (alpha * dd);
        rb = r2;
        w1 = 1.0 / (3.0 * alpha);
        w2 = (alpha - 1.0 / 3.0) / alpha;
        w3 = 0.0;
    } else {
        diag = ((r1 * r1 + r2 * r2) / 3.0 + (alpha - 2.0 / 3.0) * r3 * r3) / (alpha * dd);
        rb = r3;
        w1 = w2 = 1.0 / (3.0 * alpha);
        w3 = (alpha - 2.0 / 3.0) / alpha;
    }
    OracleResult res;
    res.example = "three-spheres";
    res.alpha = alpha;
    res.phi_star = dd * std::log(diag);
    res.c_star = rb * rb / diag - dd;
    res.m_star = diag * Eigen::MatrixXd::Identity(d, d);
    res.region = {r1, r2, r3, w1, w2, w3};
    res.region_names = {"r1", "r2", "r3", "w1", "w2", "w3"};
    return res;
}

double oracle_quad01_iboss(double alpha) {
    require_alpha_closed(alpha);
    double poly = (((alpha - 8.0) * alpha + 26.0) * alpha - 40.0) * alpha + 25.0;
    return alpha * alpha * poly / 960.0;
}

namespace {

// Moments of U[0,1] restricted to [x1,x2] u [x3,1], normalized by alpha.
struct Quad01Matrix {
    double m2, m3, m4, det;
    double psi(double x) const {
        // f(x) = (x, x^2); psi = f' M^-1 f.
        double x2 = x * x;
        return (m4 * x2 - 2.0 * m3 * x2 * x + m2 * x2 * x2) / det;
    }
};

Quad01Matrix quad01_matrix(double alpha, double x1, double x2, double x3) {
    auto seg = [](double lo, double hi, int j) {
        double plo = 1.0, phi_ = 1.0;
        for (int i = 0; i <= j; ++i) {
            plo *= lo;
            phi_ *= hi;
        }
        return (phi_ - plo) / (j + 1);
    };
    Quad01Matrix q;
    q.m2 = (seg(x1, x2, 2) + seg(x3, 1.0, 2)) / alpha;
    q.m3 = (seg(x1, x2, 3) + seg(x3, 1.0, 3)) / alpha;
    q.m4 = (seg(x1, x2, 4) + seg(x3, 1.0, 4)) / alpha;
    q.det = q.m2 * q.m4 - q.m3 * q.m3;
    return q;
}

OracleResult quad01_single_interval(double alpha) {
    Quad01Matrix q = quad01_matrix(alpha, 0.0, 0.0, 1.0 - alpha);
    OracleResult res;
    res.example = "quad01-design";
    res.alpha = alpha;
    res.phi_star = std::log(q.det);
    res.c_star = q.psi(1.0 - alpha) - 2.0;
    Eigen::Matrix2d m;
    m << q.m2, q.m3, q.m3, q.m4;
    res.m_star = m;
    res.region = {1.0 - alpha, 1.0};
    res.region_names = {"r_lo", "r_hi"};
    return res;
}

}  // namespace

OracleResult oracle_quad01_design(double alpha) {
    require_alpha_closed(alpha);

    // Candidate region: middle interval [1/2-a, 1/2+b] plus right interval
    // [1-c, 1] with a+b+c = alpha. The inter-interval gap is 1/2 + a - alpha
    // for any b, so a must stay above alpha - 1/2. All three boundary points
    // must share one score value.
    const double gap_floor = 1e-6;
    const double a_lo = std::max(0.0, alpha - 0.5) + gap_floor;
    const double a_hi = std::min(alpha, 0.5) - gap_floor;

    auto config = [&](double a, double b) {
        double c = alpha - a - b;
        return std::array<double, 3>{0.5 - a, 0.5 + b, 1.0 - c};
    };
    // Inner equation: boundary scores at 1/2+b and 1-c agree.
    auto solve_b = [&](double a) -> double {
        auto g2 = [&](double b) {
            auto [x1, x2, x3] = config(a, b);
            Quad01Matrix q = quad01_matrix(alpha, x1, x2, x3);
            return q.psi(x2) - q.psi(x3);
        };
        double lo = 0.0, hi = alpha - a;
        if (!(hi > lo)) return std::numeric_limits<double>::quiet_NaN();
        if (!find_bracket(g2, lo, hi, 64)) return std::numeric_limits<double>::quiet_NaN();
        return bisect(g2, lo, hi);
    };
    // Outer equation: score at 1/2-a agrees with the other two.
    auto g1 = [&](double a) {
        double b = solve_b(a);
        if (!std::isfinite(b)) return std::numeric_limits<double>::quiet_NaN();
        auto [x1, x2, x3] = config(a, b);
        Quad01Matrix q = quad01_matrix(alpha, x1, x2, x3);
        return q.psi(x1) - q.psi(x3);
    };

    OracleResult best;
    bool have_two_interval = false;
    if (a_hi > a_lo) {
        // Scan for sign changes; solve each and keep the best criterion value
        // (normally there is exactly one root).
        const int steps = 64;
        double prev_a = a_lo;
        double prev_g = g1(prev_a);
        for (int i = 1; i <= steps; ++i) {
            double cur_a = a_lo + (a_hi - a_lo) * i / steps;
            double cur_g = g1(cur_a);
            if (std::isfinite(prev_g) && std::isfinite(cur_g) &&
                ((prev_g < 0.0) != (cur_g < 0.0))) {
                double a = bisect(g1, prev_a, cur_a);
                double b = solve_b(a);
                if (std::isfinite(b)) {
                    auto [x1, x2, x3] = config(a, b);
                    Quad01Matrix q = quad01_matrix(alpha, x1, x2, x3);
                    double phi = std::log(q.det);
                    if (!have_two_interval || phi > best.phi_star) {
                        best.example = "quad01-design";
                        best.alpha = alpha;
                        best.phi_star = phi;
                        best.c_star = q.psi(x3) - 2.0;
                        Eigen::Matrix2d m;
                        m << q.m2, q.m3, q.m3, q.m4;
                        best.m_star = m;
                        best.region = {x1, x2, x3, 1.0};
                        best.region_names = {"m_lo", "m_hi", "r_lo", "r_hi"};
                        have_two_interval = true;
                    }
                }
            }
            prev_a = cur_a;
            prev_g = cur_g;
        }
    }
    if (!have_two_interval) return quad01_single_interval(alpha);
    return best;
}

OracleResult oracle_uniform_square(double alpha) {
    require_alpha_closed(alpha);
    const double pi = std::numbers::pi;
    const double split = 1.0 - pi / 4.0;
    double big_r, rho;
    if (alpha >= split) {
        // Excluded disk fits inside the square.
        big_r = 2.0 * std::sqrt((1.0 - alpha) / pi);
        rho = (2.0 / 3.0 - 2.0 * (1.0 - alpha) * (1.0 - alpha) / pi) / (2.0 * alpha);
    } else {
        // Disk clipped by the square edges; R in (1, sqrt(2)) solves the
        // corner-mass equation.
        auto mass = [pi](double r) {
            return 1.0 + pi * r * r / 4.0 - std::sqrt(r * r - 1.0) -
                   r * r * std::asin(1.0 / r);
        };
        auto g = [&](double r) { return mass(r) - alpha; };
        big_r = bisect(g, 1.0 + 1e-12, std::sqrt(2.0) - 1e-12);
        double r2 = big_r * big_r;
        rho = (2.0 / 3.0 + pi * r2 * r2 / 8.0 - (r2 * r2 / 2.0) * std::asin(1.0 / big_r) -
               std::sqrt(r2 - 1.0) * (r2 + 2.0) / 6.0) /
              (2.0 * alpha);
    }
    OracleResult res;
    res.example = "uniform-square";
    res.alpha = alpha;
    res.phi_star = 2.0 * std::log(rho);
    res.c_star = big_r * big_r / rho - 2.0;
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(1, 1) = rho;
    m(2, 2) = rho;
    res.m_star = m;
    res.region = {big_r, rho};
    res.region_names = {"R", "rho"};
    return res;
}

Eigen::MatrixXd uniform_square_iboss(double alpha) {
    require_alpha_closed(alpha);
    double d1 = (8.0 - 5.0 * alpha + alpha * alpha) / 12.0;
    double d2 = (8.0 - 11.0 * alpha + 4.0 * alpha * alpha) /
                (3.0 * (2.0 - alpha) * (2.0 - alpha));
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(1, 1) = d1;
    m(2, 2) = d2;
    return m;
}

}  // namespace streamthin
