#pragma once

// Mean-crowding dominance metrics and the classical diversity indices they are
// compared against. All functions take one sample's abundance vector over the
// subject roster (zeros allowed, the roster size n includes them).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "domstab/errors.hpp"
#include "domstab/ingest.hpp"

namespace domstab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Summary statistics of one community sample.
struct CommunityStats {
    double mean = 0;         // m_c, mean abundance per species
    double variance = 0;     // population variance, divisor n
    double mean_crowding = 0;
    double dominance = 0;    // D_c
};

namespace detail {

inline double checked_total(std::span<const double> values) {
    if (values.empty()) throw PreconditionError("abundance vector is empty");
    double total = 0;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0) throw PreconditionError("abundances must be finite and non-negative");
        total += v;
    }
    if (total <= 0) throw ZeroCommunityError();
    return total;
}

} // namespace detail

inline CommunityStats community_stats(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    CommunityStats st;
    st.mean = detail::checked_total(values) / n;
    double ss = 0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.variance = ss / n;
    st.mean_crowding = st.mean + st.variance / st.mean - 1.0;
    st.dominance = st.mean_crowding / st.mean;
    return st;
}

/// m* = m + V/m - 1 with species as the sampling unit.
inline double mean_crowding(std::span<const double> values) { return community_stats(values).mean_crowding; }

/// D_c = m*/m = 1 + V/m^2 - 1/m.
inline double community_dominance(std::span<const double> values) { return community_stats(values).dominance; }

/// D_sd = m*/m_s; +inf for an absent species.
inline double species_dominance_distance(std::span<const double> values, std::size_t i) {
    if (i >= values.size()) throw IndexError(i, values.size());
    auto st = community_stats(values);
    return values[i] > 0 ? st.mean_crowding / values[i] : kInf;
}

/// D_s = D_c - D_sd; -inf for an absent species.
inline double species_dominance(std::span<const double> values, std::size_t i) {
    if (i >= values.size()) throw IndexError(i, values.size());
    auto st = community_stats(values);
    return values[i] > 0 ? st.dominance - st.mean_crowding / values[i] : -kInf;
}

struct SpeciesDominance {
    double abundance = 0;
    double distance = kInf;   // D_sd
    double dominance = -kInf; // D_s
    bool sentinel = false;    // D_s was -inf and has been replaced
};

/// D_c plus D_sd / D_s for every species, computed from one set of stats.
struct SampleDominance {
    CommunityStats community;
    std::vector<SpeciesDominance> species;
};

inline SampleDominance sample_dominance(std::span<const double> values) {
    SampleDominance out;
    out.community = community_stats(values);
    out.species.reserve(values.size());
    for (double m : values) {
        SpeciesDominance sd;
        sd.abundance = m;
        if (m > 0) {
            sd.distance = out.community.mean_crowding / m;
            sd.dominance = out.community.dominance - sd.distance;
        }
        out.species.push_back(sd);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Diversity indices

enum class LogBase { Natural, Two };

struct IndexSet {
    double simpson = 0;          // sum p_i^2
    double shannon = 0;          // -sum p_i log p_i
    double shannon_evenness = 0; // H / log n
    double berger_parker = 0;    // max p_i
    double simpson_evenness = 0; // D / n, taken literally
};

enum class IndexKind { BergerParker, Shannon, ShannonEvenness, Simpson, SimpsonEvenness };

inline constexpr IndexKind kAllIndexKinds[] = {IndexKind::BergerParker, IndexKind::Shannon,
                                               IndexKind::ShannonEvenness, IndexKind::Simpson,
                                               IndexKind::SimpsonEvenness};

inline std::string_view index_name(IndexKind k) {
    switch (k) {
    case IndexKind::BergerParker: return "berger_parker";
    case IndexKind::Shannon: return "shannon";
    case IndexKind::ShannonEvenness: return "shannon_evenness";
    case IndexKind::Simpson: return "simpson";
    case IndexKind::SimpsonEvenness: return "simpson_evenness";
    }
    return "?";
}

inline double index_value(const IndexSet& s, IndexKind k) {
    switch (k) {
    case IndexKind::BergerParker: return s.berger_parker;
    case IndexKind::Shannon: return s.shannon;
    case IndexKind::ShannonEvenness: return s.shannon_evenness;
    case IndexKind::Simpson: return s.simpson;
    case IndexKind::SimpsonEvenness: return s.simpson_evenness;
    }
    return 0;
}

/// Shannon evenness is NaN for a single-species roster (log n = 0).
inline IndexSet diversity_indices(std::span<const double> values, LogBase base = LogBase::Natural) {
    const double total = detail::checked_total(values);
    const double n = static_cast<double>(values.size());
    auto log = [base](double x) { return base == LogBase::Natural ? std::log(x) : std::log2(x); };
    IndexSet s;
    for (double v : values) {
        if (v <= 0) continue;
        const double p = v / total;
        s.simpson += p * p;
        s.shannon -= p * log(p);
        s.berger_parker = std::max(s.berger_parker, p);
    }
    s.shannon = std::max(s.shannon, 0.0);
    s.shannon_evenness = values.size() > 1 ? s.shannon / log(n) : std::numeric_limits<double>::quiet_NaN();
    s.simpson_evenness = s.simpson / n;
    return s;
}

/// D_c - (n*D - n/sum m). Zero up to rounding for every valid vector.
inline double simpson_identity_residual(std::span<const double> values) {
    const double total = detail::checked_total(values);
    const double n = static_cast<double>(values.size());
    return community_dominance(values) - (n * diversity_indices(values).simpson - n / total);
}

// ---------------------------------------------------------------------------
// Simple regression

struct LinearRegressionResult {
    double slope = 0;
    double intercept = 0;
    double correlation = 0; // Pearson R
    std::size_t n = 0;
};

/// OLS of y on x. Throws DegenerateRegressionError if either side is constant.
inline LinearRegressionResult simple_regression(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("regression inputs differ in length");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    auto flat = [n](double s, double m) { return s <= 1e-24 * n * std::max(1.0, m * m); };
    if (flat(sxx, mx) || flat(syy, my)) throw DegenerateRegressionError("regression variable has zero variance");
    LinearRegressionResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.correlation = sxy / std::sqrt(sxx * syy);
    r.n = x.size();
    return r;
}

/// Regresses D_c on the chosen index across the subject's samples.
inline LinearRegressionResult regress_dominance_vs_index(const SubjectSeries& series, IndexKind which) {
    if (series.length() < 3) throw PreconditionError("index regression needs at least 3 samples");
    std::vector<double> dc, idx;
    for (std::size_t t = 0; t < series.length(); ++t) {
        auto v = series.sample(t);
        dc.push_back(community_dominance(v));
        idx.push_back(index_value(diversity_indices(v), which));
    }
    return simple_regression(idx, dc);
}

} // namespace domstab
