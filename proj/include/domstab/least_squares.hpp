#pragma once

// Least-squares primitives: rank-tolerant linear solves, a damped
// Gauss-Newton (Levenberg-Marquardt) driver, and asymptotic standard errors.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace domstab {

/// Minimum-norm least-squares solution of X beta = y. Rank-deficient designs
/// (unidentifiable columns) get the smallest-norm coefficient vector.
inline Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
    cod.setThreshold(1e-13);
    return cod.solve(y);
}

struct LmOptions {
    std::size_t max_iterations = 500;
    double relative_ss_tolerance = 1e-10;
    double step_tolerance = 1e-10;
    double initial_lambda = 1e-3;
};

struct LmResult {
    Eigen::VectorXd params;
    double ss = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> ss_history; // SS after every accepted step, starting point first
};

/// Minimises |r(x)|^2. `residuals(x)` returns r, `jacobian(x)` returns dr/dx.
/// Steps solve (J'J + lambda diag(J'J)) dx = -J'r; lambda shrinks after an
/// accepted step and grows after a rejected one. Converges when an accepted
/// near-Gauss-Newton step lowers SS by less than the relative tolerance, when
/// the step norm falls under the step tolerance, or when no damping level can
/// lower SS any further.
template <class Residuals, class Jacobian>
LmResult levenberg_marquardt(Eigen::VectorXd x, Residuals&& residuals, Jacobian&& jacobian,
                             const LmOptions& opt = {}) {
    LmResult res;
    Eigen::VectorXd r = residuals(x);
    double ss = r.squaredNorm();
    res.params = x;
    res.ss = ss;
    if (!std::isfinite(ss)) return res;
    res.ss_history.push_back(ss);

    double lambda = opt.initial_lambda;
    const auto p = x.size();
    while (res.iterations < opt.max_iterations) {
        if (ss == 0) {
            res.converged = true;
            break;
        }
        ++res.iterations;
        const Eigen::MatrixXd J = jacobian(x);
        if (!J.allFinite()) break;
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        const double diag_floor = std::max(A.diagonal().maxCoeff(), 1.0) * 1e-12;

        bool accepted = false;
        while (lambda <= 1e16) {
            Eigen::MatrixXd Al = A;
            for (Eigen::Index i = 0; i < p; ++i) Al(i, i) += lambda * std::max(A(i, i), diag_floor);
            const Eigen::VectorXd step = Al.ldlt().solve(-g);
            if (!step.allFinite()) {
                lambda *= 10;
                continue;
            }
            const Eigen::VectorXd trial = x + step;
            const Eigen::VectorXd r_trial = residuals(trial);
            const double ss_trial = r_trial.squaredNorm();
            if (std::isfinite(ss_trial) && ss_trial < ss) {
                const double rel = (ss - ss_trial) / ss;
                const bool small_step = step.norm() < opt.step_tolerance * (x.norm() + opt.step_tolerance);
                const bool near_gn = lambda <= 1.0;
                x = trial;
                r = r_trial;
                ss = ss_trial;
                res.ss_history.push_back(ss);
                lambda = std::max(lambda / 10, 1e-15);
                accepted = true;
                if ((near_gn && rel < opt.relative_ss_tolerance) || small_step) res.converged = true;
                break;
            }
            lambda *= 10;
        }
        if (!accepted) {
            // Damping cannot find a descent direction: x is a minimum to
            // working precision.
            res.converged = true;
            break;
        }
        if (res.converged) break;
    }
    res.params = x;
    res.ss = ss;
    return res;
}

struct StandardErrors {
    std::vector<double> values;
    bool singular = false;
};

/// sqrt(diag(s^2 (J'J)^-1)) with s^2 = SS/(n - p). Columns are equilibrated
/// before the rank test; a rank-deficient Jacobian (or n <= p) yields +inf for
/// every parameter.
inline StandardErrors standard_errors(const Eigen::MatrixXd& J, double ss) {
    const auto n = J.rows(), p = J.cols();
    StandardErrors out;
    out.values.assign(static_cast<std::size_t>(p), std::numeric_limits<double>::infinity());
    if (n <= p || !J.allFinite()) {
        out.singular = true;
        return out;
    }
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        scale(j) = J.col(j).norm();
        if (scale(j) == 0) {
            out.singular = true;
            return out;
        }
    }
    const Eigen::MatrixXd Js = J * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Js, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(p - 1) <= sv(0) * 1e-12) {
        out.singular = true;
        return out;
    }
    const double s2 = ss / static_cast<double>(n - p);
    const Eigen::MatrixXd& V = svd.matrixV();
    for (Eigen::Index j = 0; j < p; ++j) {
        double var = 0;
        for (Eigen::Index k = 0; k < p; ++k) var += V(j, k) * V(j, k) / (sv(k) * sv(k));
        out.values[static_cast<std::size_t>(j)] = std::sqrt(s2 * var) / scale(j);
    }
    return out;
}

} // namespace domstab
