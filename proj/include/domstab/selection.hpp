#pragma once

// Validity gates for fitted models, parsimony-ordered selection of each
// subject's primary model, and the per-subject summary rows.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "domstab/csv.hpp"
#include "domstab/errors.hpp"
#include "domstab/fitting.hpp"
#include "domstab/models.hpp"

namespace domstab {

struct SelectionPolicy {
    double r2_min = 0.30;
    double ratio_max = 20.0; // SE / |param|
    double mag_max = 1e6;    // |param|
};

struct ValidityReport {
    bool r2_ok = false;
    bool se_ok = false;
    bool magnitude_ok = false;
    bool review_ok = true;
    bool valid = false;
    std::vector<std::string> reasons;
};

/// The shape parameter a of the logistic kinds is exempt from the SE check.
inline bool se_exempt(ModelKind kind, std::size_t index) { return is_logistic(kind) && index == 1; }

inline ValidityReport validate(const ModelFit& fit, const SelectionPolicy& policy = {}) {
    ValidityReport rep;
    const auto names = parameter_names(fit.kind());

    rep.r2_ok = std::isfinite(fit.r2) && fit.r2 >= policy.r2_min;
    if (!rep.r2_ok) rep.reasons.push_back("R^2 below " + format_number(policy.r2_min));

    rep.se_ok = true;
    rep.magnitude_ok = true;
    for (std::size_t i = 0; i < fit.params.values.size(); ++i) {
        const double v = fit.params[i];
        const std::string name(names[i]);
        if (!std::isfinite(v) || std::abs(v) > policy.mag_max) {
            rep.magnitude_ok = false;
            rep.reasons.push_back("|" + name + "| exceeds " + format_number(policy.mag_max));
        }
        if (se_exempt(fit.kind(), i)) continue;
        const double se = i < fit.std_errors.size() ? fit.std_errors[i] : kNaN;
        const bool ok = std::isfinite(se) && se <= policy.ratio_max * std::abs(v);
        if (!ok) {
            rep.se_ok = false;
            rep.reasons.push_back("SE(" + name + ") too large relative to " + name);
        }
    }
    rep.valid = rep.r2_ok && rep.se_ok && rep.magnitude_ok;
    return rep;
}

struct SelectedModel {
    ModelFit fit;
    ValidityReport validity;
    std::string rationale; // "priority", "backup" or "backup-invalid"
};

/// First valid fit in priority order. Kinds listed in `rejected_on_review`
/// are treated as invalid (the manual screening step). Falls back to the
/// linear fit flagged "backup-invalid" when nothing passes.
inline SelectedModel select(std::span<const ModelFit> fits, const SelectionPolicy& policy = {},
                            const std::set<ModelKind>& rejected_on_review = {}) {
    if (fits.empty()) throw SelectionError("no fits to select from");

    auto best_of = [&](ModelKind kind, bool require_valid) -> std::optional<SelectedModel> {
        std::optional<SelectedModel> best;
        for (const auto& f : fits) {
            if (f.kind() != kind) continue;
            auto rep = validate(f, policy);
            if (rejected_on_review.contains(kind)) {
                rep.review_ok = false;
                rep.valid = false;
                rep.reasons.emplace_back("rejected on review");
            }
            if (require_valid && !rep.valid) continue;
            if (!best || detail::better(f.residual_ss, f.params, best->fit.residual_ss, best->fit.params))
                best = SelectedModel{f, rep, {}};
        }
        return best;
    };

    for (auto kind : kPriorityOrder) {
        if (auto s = best_of(kind, true)) {
            s->rationale = kind == ModelKind::Linear ? "backup" : "priority";
            return *s;
        }
    }
    if (auto s = best_of(ModelKind::Linear, false)) {
        s->rationale = "backup-invalid";
        return *s;
    }
    throw SelectionError("no valid fit and no linear backup");
}

// ---------------------------------------------------------------------------
// Summary

struct SubjectSelection {
    std::string subject_id;
    SelectedModel selected;
    double d_min = 0; // observed dominance range, used to sample regimes
    double d_max = 0;
};

struct SummaryRow {
    std::string subject_id;
    ModelKind kind = ModelKind::Linear;
    std::string label;     // e.g. "L-Q [0.85; b1 < 0, c2 > 0]"
    double quality = kNaN; // R for linear, R^2 otherwise
    std::string signs;
    std::string narrative;
    std::string sampled_regimes;
    std::string rationale;
};

namespace detail {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string sign_text(const char* name, double v) {
    return std::string(name) + (v > 0 ? " > 0" : (v < 0 ? " < 0" : " = 0"));
}

inline std::string regime_sequence(const ModelParams& p, double lo, double hi, std::size_t samples = 201) {
    std::string out;
    std::optional<Regime> last;
    if (!(hi > lo)) hi = lo;
    for (std::size_t i = 0; i < samples; ++i) {
        const double D = samples == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        Regime r;
        try {
            r = regime_at(p, D);
        } catch (const EvalError&) {
            continue;
        }
        if (r == Regime::Ambiguous || r == last) continue;
        if (last) out += " → ";
        out += regime_label(r);
        last = r;
    }
    return out;
}

inline std::string narrative(const ModelParams& p) {
    switch (p.kind) {
    case ModelKind::Linear:
        if (p[1] < 0) return "Globally DDS, but the mechanism may be complex locally.";
        return p[1] > 0 ? "Globally DID." : "Globally DIS.";
    case ModelKind::Logistic: {
        const std::string regime(regime_label(regime_of_slope(p[0] * p[1] * p[2])));
        if (p[2] < 0) return regime + " with an asymptotic equilibrium line when D_c → ∞";
        return regime + " with S approaching K as D_c → ∞";
    }
    case ModelKind::LogisticSine: return "DDS and DIS alternate periodically";
    case ModelKind::LinearQuadratic: {
        const auto dp = derived_params(p);
        if (dp.b1 > 0 && dp.c2 > 0) return "DIS followed by DDS, a possible stable equilibrium and DIS";
        if (dp.b1 < 0 && dp.c2 > 0) return "DDS followed by a possible equilibrium and DIS";
        if (dp.b1 < 0 && dp.c2 < 0) return "DDS followed by possibly two equilibriums and DDS";
        if (dp.b1 > 0 && dp.c2 < 0) return "DID followed by possibly two unstable equilibriums and DDS";
        return "Linear and quadratic phases with a degenerate slope or curvature";
    }
    case ModelKind::QuadraticQuadratic: {
        const auto dp = derived_params(p);
        const std::string joint = "two parabolas connected at D_c = d ≈ " + fixed(dp.joint, 0);
        if (dp.c1 < 0 && dp.c2 < 0) return "DDS and DIS alternate, " + joint + ", stability of equilibriums is uncertain.";
        auto opens = [](double c) { return c > 0 ? "opens up" : (c < 0 ? "opens down" : "is flat"); };
        return std::string("First parabola ") + opens(dp.c1) + ", second " + opens(dp.c2) + "; " + joint +
               ", stability of equilibriums is uncertain.";
    }
    }
    return {};
}

} // namespace detail

inline SummaryRow summarize_one(const SubjectSelection& s) {
    const auto& fit = s.selected.fit;
    SummaryRow row;
    row.subject_id = s.subject_id;
    row.kind = fit.kind();
    row.rationale = s.selected.rationale;
    const std::string kind(kind_label(fit.kind()));
    if (fit.kind() == ModelKind::Linear) {
        row.quality = fit.pearson_r.value_or(kNaN);
        row.label = kind + " (R=" + detail::fixed(std::abs(row.quality), 2) + ")"; // printed unsigned
    } else {
        row.quality = fit.r2;
        if (is_piecewise(fit.kind())) {
            const auto dp = derived_params(fit.params);
            row.signs = fit.kind() == ModelKind::LinearQuadratic
                            ? detail::sign_text("b1", dp.b1) + ", " + detail::sign_text("c2", dp.c2)
                            : detail::sign_text("c1", dp.c1) + ", " + detail::sign_text("c2", dp.c2);
            row.label = kind + " [" + detail::fixed(row.quality, 2) + "; " + row.signs + "]";
        } else {
            row.label = kind + " (" + detail::fixed(row.quality, 2) + ")";
        }
    }
    row.narrative = detail::narrative(fit.params);
    row.sampled_regimes = detail::regime_sequence(fit.params, s.d_min, s.d_max);
    return row;
}

inline std::vector<SummaryRow> summarize(std::span<const SubjectSelection> selections) {
    std::vector<SummaryRow> out;
    out.reserve(selections.size());
    for (const auto& s : selections) out.push_back(summarize_one(s));
    return out;
}

} // namespace domstab
