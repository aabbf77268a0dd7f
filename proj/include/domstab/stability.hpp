#pragma once

// Dominance records per sample and the relative-change stability series
// derived from them.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "domstab/errors.hpp"
#include "domstab/ingest.hpp"
#include "domstab/metrics.hpp"

namespace domstab {

struct DominanceRecord {
    std::string sample_id;
    double community = 0; // D_c
    std::vector<SpeciesDominance> species;
};

inline std::vector<DominanceRecord> dominance_records(const SubjectSeries& series, bool relative = false) {
    std::vector<DominanceRecord> out;
    out.reserve(series.length());
    for (std::size_t t = 0; t < series.length(); ++t) {
        auto v = series.sample(t);
        if (relative) {
            double total = 0;
            for (double x : v) total += x;
            if (total > 0)
                for (double& x : v) x /= total;
        }
        auto sd = sample_dominance(v);
        out.push_back({series.sample_ids[t], sd.community.dominance, std::move(sd.species)});
    }
    return out;
}

/// Replaces every -inf D_s with the smallest finite D_s found anywhere in the
/// subject's series. D_sd stays +inf.
inline std::vector<DominanceRecord> apply_sentinel(std::vector<DominanceRecord> records) {
    std::optional<double> floor;
    for (const auto& r : records)
        for (const auto& s : r.species)
            if (std::isfinite(s.dominance)) floor = floor ? std::min(*floor, s.dominance) : s.dominance;
    if (!floor) throw SentinelError();
    for (auto& r : records)
        for (auto& s : r.species)
            if (s.dominance == -kInf) {
                s.dominance = *floor;
                s.sentinel = true;
            }
    return records;
}

struct StabilityPoint {
    std::size_t t = 0;
    double dominance = 0; // D(t)
    double stability = 0; // (D(t+1) - D(t)) / D(t)
    bool excluded = false;
    std::string reason;   // set when excluded
    bool negative_base = false;
};

struct StabilitySeries {
    std::string subject_id;
    std::string scope; // "community" or a species id
    std::vector<StabilityPoint> points;

    std::vector<StabilityPoint> retained() const {
        std::vector<StabilityPoint> out;
        for (const auto& p : points)
            if (!p.excluded) out.push_back(p);
        return out;
    }
};

inline constexpr double kZeroDominance = 1e-9;

/// One point per consecutive pair. Points whose base |D(t)| is below `eps`
/// are kept but marked excluded.
inline StabilitySeries stability_series(const std::vector<double>& dominance, std::string scope = "community",
                                        double eps = kZeroDominance) {
    if (dominance.size() < 2) throw PreconditionError("stability needs at least 2 samples");
    StabilitySeries out;
    out.scope = std::move(scope);
    for (std::size_t t = 0; t + 1 < dominance.size(); ++t) {
        StabilityPoint p;
        p.t = t;
        p.dominance = dominance[t];
        if (!std::isfinite(dominance[t]) || !std::isfinite(dominance[t + 1])) {
            p.excluded = true;
            p.reason = "non-finite dominance";
        } else if (std::abs(dominance[t]) < eps) {
            p.excluded = true;
            p.reason = "zero denominator";
        } else {
            p.stability = (dominance[t + 1] - dominance[t]) / dominance[t];
            p.negative_base = dominance[t] < 0;
        }
        out.points.push_back(std::move(p));
    }
    return out;
}

inline StabilitySeries community_stability(const std::vector<double>& dc, double eps = kZeroDominance) {
    return stability_series(dc, "community", eps);
}

/// Expects D_s values after sentinel replacement.
inline StabilitySeries species_stability(const std::vector<double>& ds, std::string species_id = "species",
                                         double eps = kZeroDominance) {
    return stability_series(ds, std::move(species_id), eps);
}

inline std::vector<double> community_column(const std::vector<DominanceRecord>& records) {
    std::vector<double> out;
    for (const auto& r : records) out.push_back(r.community);
    return out;
}

inline std::vector<double> species_column(const std::vector<DominanceRecord>& records, std::size_t i) {
    std::vector<double> out;
    for (const auto& r : records) out.push_back(r.species.at(i).dominance);
    return out;
}

} // namespace domstab
