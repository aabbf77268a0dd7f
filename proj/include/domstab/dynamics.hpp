#pragma once

// The dominance map D(t+1) = D(t) (1 + S(D(t))): iteration, numeric fixed
// points and their multipliers, and the linear-model resilience reading.

#include <cmath>
#include <string>
#include <vector>

#include "domstab/errors.hpp"
#include "domstab/fitting.hpp"
#include "domstab/models.hpp"

namespace domstab {

enum class TrajectoryStatus { Converged, Oscillating, Collapsed, MaxSteps };

inline std::string_view status_label(TrajectoryStatus s) {
    switch (s) {
    case TrajectoryStatus::Converged: return "converged";
    case TrajectoryStatus::Oscillating: return "oscillating";
    case TrajectoryStatus::Collapsed: return "collapsed";
    case TrajectoryStatus::MaxSteps: return "max-steps";
    }
    return "?";
}

struct Trajectory {
    double initial = 0;
    std::vector<double> values; // values[0] == initial
    TrajectoryStatus status = TrajectoryStatus::MaxSteps;
    std::size_t event_step = 0; // step of convergence, cycle detection or collapse
    double limit = kNaN;        // converged value
};

inline constexpr double kConvergenceStep = 1e-10;

inline double map_step(const ModelParams& p, double D) { return D * (1.0 + eval_raw(p, D)); }

inline Trajectory iterate(const ModelParams& p, double initial, std::size_t max_steps) {
    if (!(initial > 0)) throw PreconditionError("initial dominance must be positive");
    if (max_steps < 1) throw PreconditionError("max_steps must be at least 1");
    Trajectory tr;
    tr.initial = initial;
    tr.values.push_back(initial);
    for (std::size_t t = 1; t <= max_steps; ++t) {
        const double prev = tr.values.back();
        const double next = map_step(p, prev);
        if (!std::isfinite(next)) throw DivergenceError(t);
        tr.values.push_back(next);
        if (next <= 0) {
            tr.status = TrajectoryStatus::Collapsed;
            tr.event_step = t;
            return tr;
        }
        const double scale = std::max(1.0, std::abs(next));
        if (std::abs(next - prev) < kConvergenceStep * scale) {
            tr.status = TrajectoryStatus::Converged;
            tr.event_step = t;
            tr.limit = next;
            return tr;
        }
        if (t >= 2) {
            const double two_back = tr.values[t - 2];
            if (std::abs(next - two_back) < kConvergenceStep * scale && std::abs(next - prev) > 1e-6 * scale) {
                tr.status = TrajectoryStatus::Oscillating;
                tr.event_step = t;
                return tr;
            }
        }
    }
    tr.status = TrajectoryStatus::MaxSteps;
    tr.event_step = max_steps;
    return tr;
}

enum class FixedPointVerdict { Stable, Unstable, Marginal };

inline std::string_view fixed_point_label(FixedPointVerdict v) {
    switch (v) {
    case FixedPointVerdict::Stable: return "stable";
    case FixedPointVerdict::Unstable: return "unstable";
    case FixedPointVerdict::Marginal: return "marginal";
    }
    return "?";
}

struct FixedPoint {
    double location = 0;
    double multiplier = 0; // g'(D*) with g(D) = D (1 + S(D))
    FixedPointVerdict verdict = FixedPointVerdict::Marginal;
};

inline constexpr double kRootTolerance = 1e-9;

/// Roots of S on [lo, hi]: sign scan over `grid` points, bisection of every
/// bracket, and rejection of brackets that straddle a pole rather
/// than a root. g' = 1 + S + D S'.
inline std::vector<FixedPoint> fixed_points(const ModelParams& p, double lo, double hi, std::size_t grid = 10000) {
    if (lo < 0 || !(hi > lo)) throw PreconditionError("fixed point domain must satisfy 0 <= lo < hi");
    std::vector<double> roots;
    auto S = [&](double D) { return eval_raw(p, D); };
    auto add = [&](double r) {
        if (!roots.empty() && std::abs(roots.back() - r) < 1e-8 * std::max(1.0, std::abs(r))) return;
        if (std::abs(S(r)) < kRootTolerance) roots.push_back(r);
    };
    const double h = (hi - lo) / static_cast<double>(grid - 1);
    double x0 = lo, f0 = S(lo);
    if (f0 == 0) add(lo);
    for (std::size_t i = 1; i < grid; ++i) {
        const double x1 = i + 1 == grid ? hi : lo + h * static_cast<double>(i);
        const double f1 = S(x1);
        if (std::isfinite(f0) && std::isfinite(f1)) {
            if (f1 == 0) {
                add(x1);
            } else if (f0 != 0 && (f0 < 0) != (f1 < 0)) {
                // Bisect to full double precision; this is well below 1e-10.
                double a = x0, b = x1, fa = f0, fb = f1;
                while (true) {
                    const double m = 0.5 * (a + b);
                    if (m <= a || m >= b) break;
                    const double fm = S(m);
                    if (fm == 0) {
                        a = b = m;
                        fa = fb = 0;
                        break;
                    }
                    if ((fm < 0) == (fa < 0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                        fb = fm;
                    }
                }
                const double r = std::abs(fa) <= std::abs(fb) ? a : b;
                add(r);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    std::vector<FixedPoint> out;
    for (double r : roots) {
        FixedPoint fp;
        fp.location = r;
        fp.multiplier = 1.0 + S(r) + r * derivative(p, r);
        const double m = std::abs(fp.multiplier);
        fp.verdict = std::abs(m - 1.0) <= 1e-9 ? FixedPointVerdict::Marginal
                                                : (m < 1.0 ? FixedPointVerdict::Stable : FixedPointVerdict::Unstable);
        out.push_back(fp);
    }
    return out;
}

/// Logistic models with r < 0 flatten to S = 0 only as D grows without bound.
inline std::string asymptote_note(const ModelParams& p) {
    if (p.kind == ModelKind::Logistic && p[2] < 0 && p[1] > 0)
        return "no finite fixed point; S → 0 asymptote as D_c → ∞";
    return {};
}

struct Resilience {
    double slope = 0;     // signed b
    double magnitude = 0; // |b|; larger means a faster return
};

inline Resilience resilience(const ModelFit& fit) {
    if (fit.kind() != ModelKind::Linear) throw KindError("resilience is defined for the linear model only");
    return {fit.params[1], std::abs(fit.params[1])};
}

} // namespace domstab
