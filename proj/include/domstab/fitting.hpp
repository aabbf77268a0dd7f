#pragma once

// Parameter estimation for the stability models from (D, S) points.
//
//   Linear        closed-form OLS
//   Logistic(-Sine) multi-start Levenberg-Marquardt
//   L-Q, Q-Q      joint point d profiled over a candidate grid; for fixed d the
//                 model is linear in the remaining parameters and is solved
//                 exactly, then all parameters are polished jointly.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "domstab/errors.hpp"
#include "domstab/least_squares.hpp"
#include "domstab/models.hpp"
#include "domstab/stability.hpp"

namespace domstab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct FitInput {
    std::vector<double> D;
    std::vector<double> S;

    std::size_t size() const noexcept { return D.size(); }

    static FitInput from(const StabilitySeries& series) {
        FitInput in;
        for (const auto& p : series.points) {
            if (p.excluded) continue;
            in.D.push_back(p.dominance);
            in.S.push_back(p.stability);
        }
        return in;
    }
};

struct ModelFit {
    ModelParams params;
    std::vector<double> std_errors;
    double r2 = kNaN;
    double r2_adj = kNaN;
    bool r2_adj_defined = false;
    std::optional<double> pearson_r; // linear fits only
    double residual_ss = 0;
    std::optional<DerivedParams> derived;
    bool converged = true;
    std::size_t iterations = 0;
    bool degenerate = false;
    bool singular_information = false;
    std::size_t n = 0;
    std::vector<std::string> notes;
    std::vector<double> ss_history;

    ModelKind kind() const noexcept { return params.kind; }
};

class NonConvergenceError : public AnalysisError {
public:
    explicit NonConvergenceError(ModelFit best)
        : AnalysisError(std::string(kind_label(best.kind())) + " fit did not converge from any start"),
          best_(std::move(best)) {}
    const ModelFit& best_attempt() const noexcept { return best_; }

private:
    ModelFit best_;
};

// ---------------------------------------------------------------------------
// Shared pieces

namespace detail {

inline void check_input(ModelKind kind, const FitInput& in) {
    if (in.D.size() != in.S.size()) throw PreconditionError("D and S differ in length");
    if (in.size() < arity(kind) + 1)
        throw PreconditionError(std::string(kind_label(kind)) + " needs at least " +
                                std::to_string(arity(kind) + 1) + " points, got " + std::to_string(in.size()));
    auto [lo, hi] = std::minmax_element(in.D.begin(), in.D.end());
    if (*lo == *hi) throw DegenerateFitError("all D values are identical");
    for (std::size_t i = 0; i < in.size(); ++i)
        if (!std::isfinite(in.D[i]) || !std::isfinite(in.S[i])) throw PreconditionError("non-finite fit input");
}

inline Eigen::VectorXd residual_vector(const ModelParams& p, const FitInput& in) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(in.size()));
    for (std::size_t i = 0; i < in.size(); ++i)
        r(static_cast<Eigen::Index>(i)) = in.S[i] - eval_raw(p, in.D[i]);
    return r;
}

/// Jacobian of the residuals (= minus the model gradient).
inline Eigen::MatrixXd residual_jacobian(const ModelParams& p, const FitInput& in) {
    const auto n = static_cast<Eigen::Index>(in.size()), k = static_cast<Eigen::Index>(arity(p.kind));
    Eigen::MatrixXd J(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto g = parameter_gradient(p, in.D[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < k; ++j) J(i, j) = -g[static_cast<std::size_t>(j)];
    }
    return J;
}

inline ModelParams with_values(ModelKind kind, const Eigen::VectorXd& v) {
    return ModelParams(kind, std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd as_vector(const ModelParams& p) {
    return Eigen::Map<const Eigen::VectorXd>(p.values.data(), static_cast<Eigen::Index>(p.values.size()));
}

inline double sum_of_squares(const ModelParams& p, const FitInput& in) { return residual_vector(p, in).squaredNorm(); }

/// Strict weak order used to pick among candidate solutions: SS first, then
/// the joint point (piecewise), then the parameter vector.
inline bool better(double ss_a, const ModelParams& a, double ss_b, const ModelParams& b) {
    if (std::isnan(ss_b)) return !std::isnan(ss_a);
    if (std::isnan(ss_a)) return false;
    if (ss_a != ss_b) return ss_a < ss_b;
    if (is_piecewise(a.kind) && a.joint() != b.joint()) return a.joint() < b.joint();
    return a.values < b.values;
}

} // namespace detail

struct Goodness {
    double r2 = kNaN;
    double r2_adj = kNaN;
    bool r2_adj_defined = false;
};

/// r2 = 1 - SS_res/SS_tot with SS_tot about mean(S);
/// r2_adj = 1 - (1 - r2)(n - 1)/(n - p - 1), undefined when n <= p + 1.
inline Goodness goodness(const ModelParams& p, const FitInput& in) {
    const double n = static_cast<double>(in.size());
    double mean = 0;
    for (double s : in.S) mean += s;
    mean /= n;
    double sst = 0;
    for (double s : in.S) sst += (s - mean) * (s - mean);
    const double ssr = detail::sum_of_squares(p, in);
    Goodness g;
    if (sst > 0) g.r2 = 1.0 - ssr / sst;
    const double k = static_cast<double>(arity(p.kind));
    if (n > k + 1 && std::isfinite(g.r2)) {
        g.r2_adj = 1.0 - (1.0 - g.r2) * (n - 1) / (n - k - 1);
        g.r2_adj_defined = true;
    }
    return g;
}

/// Asymptotic SEs from the analytic Jacobian at `p`.
inline StandardErrors std_errors(const ModelParams& p, const FitInput& in) {
    return standard_errors(detail::residual_jacobian(p, in), detail::sum_of_squares(p, in));
}

namespace detail {

inline ModelFit finish(ModelParams p, const FitInput& in) {
    ModelFit fit;
    fit.n = in.size();
    fit.residual_ss = sum_of_squares(p, in);
    auto g = goodness(p, in);
    fit.r2 = g.r2;
    fit.r2_adj = g.r2_adj;
    fit.r2_adj_defined = g.r2_adj_defined;
    if (!std::isfinite(g.r2)) {
        fit.degenerate = true;
        fit.notes.emplace_back("S has zero variance; R^2 undefined");
    }
    auto se = std_errors(p, in);
    fit.std_errors = se.values;
    fit.singular_information = se.singular;
    if (se.singular) fit.notes.emplace_back("singular information matrix; standard errors are infinite");
    if (is_piecewise(p.kind)) fit.derived = derived_params(p);
    fit.params = std::move(p);
    return fit;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Linear

inline ModelFit fit_linear(const FitInput& in) {
    detail::check_input(ModelKind::Linear, in);
    const double n = static_cast<double>(in.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        mx += in.D[i];
        my += in.S[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        sxx += (in.D[i] - mx) * (in.D[i] - mx);
        sxy += (in.D[i] - mx) * (in.S[i] - my);
        syy += (in.S[i] - my) * (in.S[i] - my);
    }
    const double b = sxy / sxx;
    const double a = my - b * mx;
    auto fit = detail::finish(linear(a, b), in);

    const double s2 = fit.residual_ss / (n - 2);
    fit.std_errors = {std::sqrt(s2 * (1.0 / n + mx * mx / sxx)), std::sqrt(s2 / sxx)};
    fit.singular_information = false;
    std::erase_if(fit.notes, [](const std::string& s) { return s.starts_with("singular"); });
    if (syy > 0) fit.pearson_r = sxy / std::sqrt(sxx * syy);
    else fit.notes.emplace_back("Pearson R undefined");
    return fit;
}

// ---------------------------------------------------------------------------
// Logistic and logistic-sine

struct StartConfig {
    bool grid = true;    // fixed multiplicative grid over (K, a, r)
    bool profile = true; // r-profiled linearisation starts
    std::vector<std::vector<double>> extra; // explicit (K, a, r) starts
    LmOptions lm;
};

namespace detail {

inline std::vector<std::vector<double>> logistic_starts(ModelKind kind, const FitInput& in, const StartConfig& cfg) {
    auto [lo, hi] = std::minmax_element(in.D.begin(), in.D.end());
    const double range = *hi - *lo;
    double smax = 0;
    for (double s : in.S) smax = std::max(smax, std::abs(s));
    if (smax == 0) smax = 1;

    std::vector<std::vector<double>> starts = cfg.extra;
    if (cfg.grid) {
        const double Ks[] = {smax, -smax, 2 * smax, -2 * smax};
        const double rs[] = {0.01, 0.1, 1, 10};
        std::vector<double> as = {1e-4, 1, 1e4};
        if (kind == ModelKind::LogisticSine) as.insert(as.end(), {-0.5, -1, -2});
        for (double K : Ks)
            for (double r : rs)
                for (double sgn : {1.0, -1.0})
                    for (double a : as) starts.push_back({K, a, sgn * r / range});
    }
    if (cfg.profile) {
        // For fixed r, S (1 + a e^{-rD}) / K = g(D) is linear in u = 1/K and
        // v = a/K: minimise sum (S u + S e^{-rD} v - g)^2.
        const double scales[] = {0.01, 0.03, 0.1, 0.3, 1, 3, 10, 30};
        const auto n = static_cast<Eigen::Index>(in.size());
        for (double sc : scales)
            for (double sgn : {1.0, -1.0}) {
                const double r = sgn * sc / range;
                Eigen::MatrixXd X(n, 2);
                Eigen::VectorXd y(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double D = in.D[static_cast<std::size_t>(i)], S = in.S[static_cast<std::size_t>(i)];
                    X(i, 0) = S;
                    X(i, 1) = S * std::exp(-r * D);
                    y(i) = kind == ModelKind::LogisticSine ? periodic_factor(D) : 1.0;
                }
                if (!X.allFinite()) continue;
                Eigen::VectorXd uv = solve_least_squares(X, y);
                if (!uv.allFinite() || uv(0) == 0) continue;
                starts.push_back({1.0 / uv(0), uv(1) / uv(0), r});
            }
    }
    return starts;
}

} // namespace detail

/// Best converged multi-start fit of a logistic-family model.
inline ModelFit fit_logistic_family(ModelKind kind, const FitInput& in, const StartConfig& cfg = {}) {
    if (!is_logistic(kind)) throw KindError("fit_logistic_family needs Logistic or Logistic-Sine");
    detail::check_input(kind, in);
    if (std::all_of(in.S.begin(), in.S.end(), [](double s) { return s == 0; })) {
        // Every start collapses onto S = 0; report the flat member directly.
        auto fit = detail::finish(ModelParams(kind, {0.0, 1.0, 0.0}), in);
        fit.degenerate = true;
        fit.notes.emplace_back("K is zero; model is flat");
        return fit;
    }
    auto starts = detail::logistic_starts(kind, in, cfg);
    if (starts.empty()) throw PreconditionError("no starting points");

    auto residuals = [&](const Eigen::VectorXd& x) { return detail::residual_vector(detail::with_values(kind, x), in); };
    auto jacobian = [&](const Eigen::VectorXd& x) { return detail::residual_jacobian(detail::with_values(kind, x), in); };

    std::optional<LmResult> best, best_any;
    for (const auto& s : starts) {
        Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(s.data(), 3);
        if (!x0.allFinite()) continue;
        auto res = levenberg_marquardt(x0, residuals, jacobian, cfg.lm);
        if (!std::isfinite(res.ss) || !res.params.allFinite()) continue;
        auto pick = [&](std::optional<LmResult>& slot) {
            if (!slot || detail::better(res.ss, detail::with_values(kind, res.params), slot->ss,
                                        detail::with_values(kind, slot->params)))
                slot = res;
        };
        pick(best_any);
        if (res.converged) pick(best);
    }
    if (!best) {
        if (!best_any) throw PreconditionError("no start produced a finite fit");
        auto attempt = detail::finish(detail::with_values(kind, best_any->params), in);
        attempt.converged = false;
        attempt.iterations = best_any->iterations;
        throw NonConvergenceError(std::move(attempt));
    }
    auto fit = detail::finish(detail::with_values(kind, best->params), in);
    fit.iterations = best->iterations;
    fit.ss_history = best->ss_history;
    if (std::abs(fit.params[0]) <= 1e-12 * std::max(1.0, fit.residual_ss)) {
        fit.degenerate = true;
        fit.notes.emplace_back("K is zero; model is flat");
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Piecewise (L-Q, Q-Q)

struct ProfilePoint {
    ModelParams params;
    double ss = kNaN;
};

/// Exact least-squares fit of every parameter except the joint, which is held
/// at `d`. Sign(D - d) is fixed once d is, so the model is linear in the rest.
inline ProfilePoint piecewise_profile(ModelKind kind, const FitInput& in, double d) {
    if (!is_piecewise(kind)) throw KindError("piecewise_profile needs L-Q or Q-Q");
    const auto n = static_cast<Eigen::Index>(in.size());
    const Eigen::Index k = static_cast<Eigen::Index>(arity(kind)) - 1;
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double D = in.D[static_cast<std::size_t>(i)];
        const double au = std::abs(D - d);
        y(i) = in.S[static_cast<std::size_t>(i)];
        X(i, 0) = 1.0;
        X(i, 1) = D;
        if (kind == ModelKind::LinearQuadratic) {
            X(i, 2) = D * D + au * (D + d);
            X(i, 3) = au;
        } else {
            X(i, 2) = D * D;
            X(i, 3) = au * (D + d);
            X(i, 4) = au;
        }
    }
    Eigen::VectorXd beta = solve_least_squares(X, y);
    std::vector<double> v(beta.data(), beta.data() + 3);
    v.push_back(d);
    for (Eigen::Index j = 3; j < k; ++j) v.push_back(beta(j));
    ProfilePoint out{ModelParams(kind, std::move(v)), 0};
    out.ss = (y - X * beta).squaredNorm();
    return out;
}

/// Joint-point candidates: every gap between consecutive distinct D values
/// that leaves at least `min_side` distinct values on each side contributes
/// its endpoints and its quartile points.
inline std::vector<double> joint_candidates(const FitInput& in, std::size_t min_side = 3) {
    std::vector<double> u = in.D;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    std::vector<double> out;
    for (std::size_t k = 1; k < u.size(); ++k) {
        const std::size_t left = k, right = u.size() - k; // distinct values <= u[k-1] and >= u[k]
        if (left < min_side || right < min_side) continue;
        const double lo = u[k - 1], hi = u[k];
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) out.push_back(lo + q * (hi - lo));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline ModelFit fit_piecewise(ModelKind kind, const FitInput& in, std::span<const double> extra_candidates = {},
                              const LmOptions& lm = {}) {
    if (!is_piecewise(kind)) throw KindError("fit_piecewise needs L-Q or Q-Q");
    detail::check_input(kind, in);
    auto grid = joint_candidates(in);
    if (grid.empty()) throw InsufficientSupportError("no joint candidate has 3 distinct D values on each side");

    std::vector<ProfilePoint> profiled;
    profiled.reserve(grid.size());
    for (double d : grid) profiled.push_back(piecewise_profile(kind, in, d));

    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detail::better(profiled[a].ss, profiled[a].params, profiled[b].ss, profiled[b].params);
    });

    ProfilePoint best = profiled[order.front()];
    auto consider = [&](const ProfilePoint& p) {
        if (detail::better(p.ss, p.params, best.ss, best.params)) best = p;
    };
    for (double d : extra_candidates)
        if (std::isfinite(d)) consider(piecewise_profile(kind, in, d));

    // Refine the three best grid cells by Brent minimisation of the profile.
    for (std::size_t rank = 0; rank < std::min<std::size_t>(3, order.size()); ++rank) {
        const std::size_t i = order[rank];
        const double lo = grid[i == 0 ? 0 : i - 1], hi = grid[std::min(i + 1, grid.size() - 1)];
        if (!(hi > lo)) continue;
        auto f = [&](double d) { return piecewise_profile(kind, in, d).ss; };
        auto [d, ss] = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits);
        (void)ss;
        consider(piecewise_profile(kind, in, d));
    }

    // Joint polish of all parameters, including d.
    auto residuals = [&](const Eigen::VectorXd& x) { return detail::residual_vector(detail::with_values(kind, x), in); };
    auto jacobian = [&](const Eigen::VectorXd& x) { return detail::residual_jacobian(detail::with_values(kind, x), in); };
    auto res = levenberg_marquardt(detail::as_vector(best.params), residuals, jacobian, lm);
    std::size_t iterations = res.iterations;
    if (res.params.allFinite() && std::isfinite(res.ss)) {
        // Re-solve the linear part at the polished joint so the inner
        // parameters are exactly optimal for the reported d.
        consider(piecewise_profile(kind, in, res.params(static_cast<Eigen::Index>(kJointIndex))));
        consider(ProfilePoint{detail::with_values(kind, res.params), res.ss});
    }

    auto fit = detail::finish(best.params, in);
    fit.iterations = iterations;
    fit.ss_history = res.ss_history;
    return fit;
}

// ---------------------------------------------------------------------------
// Dispatch

struct FitAttempt {
    ModelKind kind = ModelKind::Linear;
    std::optional<ModelFit> fit;
    std::string error; // set when the fit failed
};

inline ModelFit fit_model(ModelKind kind, const FitInput& in, std::span<const double> joint_hints = {}) {
    switch (kind) {
    case ModelKind::Linear: return fit_linear(in);
    case ModelKind::Logistic:
    case ModelKind::LogisticSine: return fit_logistic_family(kind, in);
    case ModelKind::LinearQuadratic:
    case ModelKind::QuadraticQuadratic: return fit_piecewise(kind, in, joint_hints);
    }
    throw KindError("unknown model kind");
}

/// Fits every requested kind, recording failures instead of throwing. The
/// L-Q joint is offered to Q-Q as an extra candidate, so the nested ordering
/// SS(Q-Q) <= SS(L-Q) holds whenever both are fitted.
inline std::vector<FitAttempt> fit_all(const FitInput& in, std::span<const ModelKind> kinds) {
    std::vector<FitAttempt> out;
    std::vector<double> hints;
    auto run = [&](ModelKind k) {
        FitAttempt a;
        a.kind = k;
        try {
            a.fit = fit_model(k, in, hints);
            if (k == ModelKind::LinearQuadratic) hints.push_back(a.fit->params.joint());
        } catch (const NonConvergenceError& e) {
            a.error = e.what();
        } catch (const AnalysisError& e) {
            a.error = e.what();
        }
        return a;
    };
    // L-Q runs first so its joint is available to Q-Q; output keeps the
    // caller's order.
    std::vector<std::optional<FitAttempt>> slots(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i)
        if (kinds[i] == ModelKind::LinearQuadratic) slots[i] = run(kinds[i]);
    for (std::size_t i = 0; i < kinds.size(); ++i)
        if (!slots[i]) slots[i] = run(kinds[i]);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

} // namespace domstab
