#pragma once

// The five stability model families S = f(D): evaluation, analytic
// derivatives in D and in the parameters, derived branch parameters for the
// piecewise families, and regime / equilibrium classification.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "domstab/errors.hpp"

namespace domstab {

enum class ModelKind { Linear, Logistic, LogisticSine, LinearQuadratic, QuadraticQuadratic };

/// Selection priority order, most preferred first.
inline constexpr std::array<ModelKind, 5> kPriorityOrder = {ModelKind::Logistic, ModelKind::LogisticSine,
                                                            ModelKind::LinearQuadratic,
                                                            ModelKind::QuadraticQuadratic, ModelKind::Linear};

inline constexpr std::array<ModelKind, 5> kAllKinds = {ModelKind::Linear, ModelKind::Logistic,
                                                       ModelKind::LogisticSine, ModelKind::LinearQuadratic,
                                                       ModelKind::QuadraticQuadratic};

inline constexpr std::size_t arity(ModelKind k) {
    switch (k) {
    case ModelKind::Linear: return 2;
    case ModelKind::Logistic:
    case ModelKind::LogisticSine: return 3;
    case ModelKind::LinearQuadratic: return 5;
    case ModelKind::QuadraticQuadratic: return 6;
    }
    return 0;
}

inline constexpr bool is_piecewise(ModelKind k) {
    return k == ModelKind::LinearQuadratic || k == ModelKind::QuadraticQuadratic;
}

inline constexpr bool is_logistic(ModelKind k) { return k == ModelKind::Logistic || k == ModelKind::LogisticSine; }

/// Display label as used in summaries.
inline std::string_view kind_label(ModelKind k) {
    switch (k) {
    case ModelKind::Linear: return "Linear";
    case ModelKind::Logistic: return "Logistic";
    case ModelKind::LogisticSine: return "Logistic-Sine";
    case ModelKind::LinearQuadratic: return "L-Q";
    case ModelKind::QuadraticQuadratic: return "Q-Q";
    }
    return "?";
}

/// Identifier used on the command line and in file names.
inline std::string_view kind_slug(ModelKind k) {
    switch (k) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::LogisticSine: return "logistic-sine";
    case ModelKind::LinearQuadratic: return "lq";
    case ModelKind::QuadraticQuadratic: return "qq";
    }
    return "?";
}

inline ModelKind parse_kind(std::string_view s) {
    for (auto k : kAllKinds)
        if (s == kind_slug(k) || s == kind_label(k)) return k;
    throw InputError("unknown model kind '" + std::string(s) + "'");
}

/// Parameter names in storage order.
inline std::vector<std::string_view> parameter_names(ModelKind k) {
    switch (k) {
    case ModelKind::Linear: return {"a", "b"};
    case ModelKind::Logistic:
    case ModelKind::LogisticSine: return {"K", "a", "r"};
    case ModelKind::LinearQuadratic: return {"a", "b", "c", "d", "e"};
    case ModelKind::QuadraticQuadratic: return {"a", "b", "c", "d", "e", "f"};
    }
    return {};
}

/// Index of the joint point d for piecewise kinds.
inline constexpr std::size_t kJointIndex = 3;

struct ModelParams {
    ModelKind kind = ModelKind::Linear;
    std::vector<double> values;

    ModelParams() = default;
    ModelParams(ModelKind k, std::vector<double> v) : kind(k), values(std::move(v)) {
        if (values.size() != arity(kind))
            throw KindError(std::string(kind_label(kind)) + " takes " + std::to_string(arity(kind)) +
                            " parameters, got " + std::to_string(values.size()));
    }

    double operator[](std::size_t i) const { return values[i]; }
    double joint() const { return values.at(kJointIndex); }
};

inline ModelParams linear(double a, double b) { return {ModelKind::Linear, {a, b}}; }
inline ModelParams logistic(double K, double a, double r) { return {ModelKind::Logistic, {K, a, r}}; }
inline ModelParams logistic_sine(double K, double a, double r) { return {ModelKind::LogisticSine, {K, a, r}}; }
inline ModelParams linear_quadratic(double a, double b, double c, double d, double e) {
    return {ModelKind::LinearQuadratic, {a, b, c, d, e}};
}
inline ModelParams quadratic_quadratic(double a, double b, double c, double d, double e, double f) {
    return {ModelKind::QuadraticQuadratic, {a, b, c, d, e, f}};
}

namespace detail {

inline double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

inline double periodic_factor(double D) { return std::sin(D / std::numbers::pi); }

inline double logistic_core(const ModelParams& p, double D) {
    return p[0] / (1.0 + p[1] * std::exp(-p[2] * D));
}

inline double checked(double v, const ModelParams& p, double D) {
    if (!std::isfinite(v))
        throw EvalError(std::string(kind_label(p.kind)) + " is not finite at D = " + std::to_string(D));
    return v;
}

inline double eval_unchecked(const ModelParams& p, double D) {
    switch (p.kind) {
    case ModelKind::Linear: return p[0] + p[1] * D;
    case ModelKind::Logistic: return logistic_core(p, D);
    case ModelKind::LogisticSine: return logistic_core(p, D) * periodic_factor(D);
    case ModelKind::LinearQuadratic: {
        const double u = D - p[3];
        return p[0] + p[1] * D + p[2] * D * D + u * sign(u) * (p[2] * (D + p[3]) + p[4]);
    }
    case ModelKind::QuadraticQuadratic: {
        const double u = D - p[3];
        return p[0] + p[1] * D + p[2] * D * D + u * sign(u) * (p[4] * (D + p[3]) + p[5]);
    }
    }
    return 0;
}

} // namespace detail

/// S(D). Piecewise kinds use Sign(0) = 0, so the joint evaluates to the
/// common branch value.
inline double eval(const ModelParams& p, double D) { return detail::checked(detail::eval_unchecked(p, D), p, D); }

/// Evaluation that returns NaN/inf instead of throwing; used inside solvers.
inline double eval_raw(const ModelParams& p, double D) { return detail::eval_unchecked(p, D); }

struct OneSided {
    double left = 0;
    double right = 0;
};

/// Left and right derivatives dS/dD; equal everywhere except at a piecewise joint.
inline OneSided one_sided_derivative(const ModelParams& p, double D) {
    double left = 0, right = 0;
    switch (p.kind) {
    case ModelKind::Linear: left = right = p[1]; break;
    case ModelKind::Logistic:
    case ModelKind::LogisticSine: {
        const double E = std::exp(-p[2] * D);
        const double den = 1.0 + p[1] * E;
        const double dcore = p[0] * p[1] * p[2] * E / (den * den);
        if (p.kind == ModelKind::Logistic) {
            left = right = dcore;
        } else {
            const double core = p[0] / den;
            left = right = dcore * detail::periodic_factor(D) + core * std::cos(D / std::numbers::pi) / std::numbers::pi;
        }
        break;
    }
    case ModelKind::LinearQuadratic:
        left = p[1] - p[4];
        right = p[1] + p[4] + 4.0 * p[2] * D;
        if (D < p[3]) right = left;
        else if (D > p[3]) left = right;
        break;
    case ModelKind::QuadraticQuadratic:
        left = (p[1] - p[5]) + 2.0 * (p[2] - p[4]) * D;
        right = (p[1] + p[5]) + 2.0 * (p[2] + p[4]) * D;
        if (D < p[3]) right = left;
        else if (D > p[3]) left = right;
        break;
    }
    detail::checked(left, p, D);
    detail::checked(right, p, D);
    return {left, right};
}

/// dS/dD. At a piecewise joint this is the right-hand derivative.
inline double derivative(const ModelParams& p, double D) { return one_sided_derivative(p, D).right; }

/// Gradient of S with respect to the parameters, in storage order.
inline std::vector<double> parameter_gradient(const ModelParams& p, double D) {
    switch (p.kind) {
    case ModelKind::Linear: return {1.0, D};
    case ModelKind::Logistic:
    case ModelKind::LogisticSine: {
        const double E = std::exp(-p[2] * D);
        const double den = 1.0 + p[1] * E;
        const double s = p.kind == ModelKind::LogisticSine ? detail::periodic_factor(D) : 1.0;
        return {s / den, -s * p[0] * E / (den * den), s * p[0] * p[1] * D * E / (den * den)};
    }
    case ModelKind::LinearQuadratic: {
        const double u = D - p[3], sg = detail::sign(u), au = u * sg;
        const double dd = p[2] * (au - sg * (D + p[3])) - sg * p[4];
        return {1.0, D, D * D + au * (D + p[3]), dd, au};
    }
    case ModelKind::QuadraticQuadratic: {
        const double u = D - p[3], sg = detail::sign(u), au = u * sg;
        const double dd = p[4] * au - sg * (p[4] * (D + p[3]) + p[5]);
        return {1.0, D, D * D, dd, au * (D + p[3]), au};
    }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Branch decomposition

/// Explicit polynomial branches of a piecewise model. Left branch applies for
/// D <= joint, right branch for D >= joint; S = a_i + b_i D + c_i D^2.
/// For L-Q the left quadratic coefficient c1 is zero.
struct DerivedParams {
    ModelKind kind = ModelKind::LinearQuadratic;
    double joint = 0;
    double a1 = 0, b1 = 0, c1 = 0;
    double a2 = 0, b2 = 0, c2 = 0;
};

/// Branch coefficients from direct expansion of the Sign() form.
inline DerivedParams derived_params(const ModelParams& p) {
    DerivedParams out;
    out.kind = p.kind;
    if (p.kind == ModelKind::LinearQuadratic) {
        const double a = p[0], b = p[1], c = p[2], d = p[3], e = p[4];
        out.joint = d;
        out.a1 = a + c * d * d + e * d;
        out.b1 = b - e;
        out.c1 = 0;
        out.a2 = a - c * d * d - e * d;
        out.b2 = b + e;
        out.c2 = 2 * c;
    } else if (p.kind == ModelKind::QuadraticQuadratic) {
        const double a = p[0], b = p[1], c = p[2], d = p[3], e = p[4], f = p[5];
        out.joint = d;
        out.a1 = a + e * d * d + f * d;
        out.b1 = b - f;
        out.c1 = c - e;
        out.a2 = a - e * d * d - f * d;
        out.b2 = b + f;
        out.c2 = c + e;
    } else {
        throw KindError("derived parameters exist only for L-Q and Q-Q models");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regimes

/// DDS: stability rises with dominance (dS/dD < 0). DID: dS/dD > 0.
/// DIS: dS/dD = 0. Ambiguous: one-sided derivatives at a joint disagree.
enum class Regime { DDS, DID, DIS, Ambiguous };

inline std::string_view regime_label(Regime r) {
    switch (r) {
    case Regime::DDS: return "DDS";
    case Regime::DID: return "DID";
    case Regime::DIS: return "DIS";
    case Regime::Ambiguous: return "joint-ambiguous";
    }
    return "?";
}

inline constexpr double kRegimeTolerance = 1e-9;

inline Regime regime_of_slope(double slope, double tol = kRegimeTolerance) {
    if (std::abs(slope) <= tol) return Regime::DIS;
    return slope < 0 ? Regime::DDS : Regime::DID;
}

inline Regime regime_at(const ModelParams& p, double D, double tol = kRegimeTolerance) {
    auto s = one_sided_derivative(p, D);
    auto l = regime_of_slope(s.left, tol), r = regime_of_slope(s.right, tol);
    return l == r ? l : Regime::Ambiguous;
}

enum class PointKind { Joint, Vertex };

enum class Verdict { Stable, Unstable, DependsOnC2, Uncertain };

inline std::string_view verdict_label(Verdict v) {
    switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::DependsOnC2: return "depends on c2";
    case Verdict::Uncertain: return "uncertain";
    }
    return "?";
}

/// Parameter-sign reading of a candidate equilibrium (qualitative, not a
/// numeric fixed point).
struct QualitativeEquilibrium {
    double location = 0;
    PointKind kind = PointKind::Joint;
    Verdict verdict = Verdict::Uncertain;
    std::string branch;    // "joint", "left" or "right"
    bool on_branch = true; // vertex lies inside its own branch's domain
};

inline std::vector<QualitativeEquilibrium> qualitative_equilibria(const ModelParams& p) {
    const auto dp = derived_params(p);
    std::vector<QualitativeEquilibrium> out;
    auto vertex = [&](double b, double c, const char* branch, bool left) {
        if (c == 0) return;
        const double loc = -b / (2 * c);
        out.push_back({loc, PointKind::Vertex, c > 0 ? Verdict::Stable : Verdict::Unstable, branch,
                       left ? loc <= dp.joint : loc >= dp.joint});
    };
    if (p.kind == ModelKind::LinearQuadratic) {
        Verdict joint = Verdict::Uncertain;
        if (dp.b1 > kRegimeTolerance) joint = Verdict::Unstable;
        else if (dp.b1 < -kRegimeTolerance) joint = Verdict::DependsOnC2;
        out.push_back({dp.joint, PointKind::Joint, joint, "joint", true});
        vertex(dp.b2, dp.c2, "right", false);
    } else {
        vertex(dp.b1, dp.c1, "left", true);
        out.push_back({dp.joint, PointKind::Joint, Verdict::Uncertain, "joint", true});
        vertex(dp.b2, dp.c2, "right", false);
    }
    return out;
}

} // namespace domstab
