#pragma once

// Cohort pipeline behind the command line: loads a table, runs the per-subject
// analyses and writes the CSV / SVG outputs.
//
// Output layout under the output directory:
//   metrics/<subject>.csv            D_c and per-species D_sd / D_s per sample
//   stability/<subject>.csv          community and species stability series
//   compare_indices.csv              D_c regressed on the five diversity indices
//   fits/fit_<kind>.csv              one row per subject for each model kind
//   selection.csv                    selected model and regime narrative
//   simulate/<subject>_*.csv|.svg    trajectory, fixed points, model plot
//   run_info.csv                     configuration echo (including the seed)

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "domstab/csv.hpp"
#include "domstab/dynamics.hpp"
#include "domstab/errors.hpp"
#include "domstab/fitting.hpp"
#include "domstab/ingest.hpp"
#include "domstab/metrics.hpp"
#include "domstab/models.hpp"
#include "domstab/selection.hpp"
#include "domstab/stability.hpp"
#include "domstab/svg.hpp"

namespace domstab {

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path out_dir = "out";
    Count min_total_reads = 10;
    SampleIdRule id_rule;
    TableFormat format = TableFormat::Auto;
    bool relative = false; // divide each sample by its total before the metrics
    std::vector<ModelKind> models{kAllKinds.begin(), kAllKinds.end()};
    SelectionPolicy policy;
    bool plot = false;
    std::uint64_t seed = 20170101;
    bool parallel = true;

    // simulate
    std::optional<std::string> subject;
    std::optional<double> initial;
    std::size_t steps = 200;
};

inline void validate_config(const RunConfig& c) {
    if (!(c.policy.r2_min > 0) || !(c.policy.ratio_max > 0) || !(c.policy.mag_max > 0))
        throw InputError("selection thresholds must be positive");
    if (c.models.empty()) throw InputError("no models requested");
    if (c.steps < 1) throw InputError("steps must be at least 1");
}

enum class Command { Metrics, CompareIndices, Fit, Select, Simulate, ReportAll };

struct CommandResult {
    int exit_code = 0; // 0 ok, 1 input error, 2 analysis error (partial outputs kept)
    std::vector<std::string> messages;
    std::vector<std::filesystem::path> files;
};

// ---------------------------------------------------------------------------
// Per-subject analysis

struct SubjectAnalysis {
    std::string subject_id;
    SubjectSeries series; // after the low-read filter
    bool empty_roster = false;
    std::vector<DominanceRecord> records; // sentinel applied
    std::optional<StabilitySeries> community;
    FitInput input;
    std::vector<FitAttempt> fits;
    std::optional<SelectedModel> selected;
    std::vector<std::string> errors;

    bool fitted(ModelKind k) const {
        return std::any_of(fits.begin(), fits.end(), [k](const auto& a) { return a.kind == k && a.fit; });
    }
};

inline std::vector<SubjectSeries> load_cohort(const RunConfig& config) {
    std::ifstream in(config.input, std::ios::binary);
    if (!in) throw InputError("cannot open input " + config.input.string());
    auto table = parse_table(in, config.format);
    return split_subjects(table, config.id_rule);
}

inline SubjectAnalysis analyze_subject(const SubjectSeries& raw, const RunConfig& config, bool fit) {
    SubjectAnalysis a;
    a.subject_id = raw.subject_id;
    try {
        a.series = filter_low_reads(raw, config.min_total_reads);
    } catch (const EmptyRosterError& e) {
        a.series = raw;
        a.series.species_ids.clear();
        a.series.counts.clear();
        a.empty_roster = true;
        a.errors.emplace_back(e.what());
        return a;
    }
    try {
        a.records = apply_sentinel(dominance_records(a.series, config.relative));
    } catch (const AnalysisError& e) {
        a.errors.emplace_back(e.what());
        return a;
    }
    if (!fit || !a.series.analyzable()) return a;

    a.community = community_stability(community_column(a.records));
    a.community->subject_id = a.subject_id;
    a.input = FitInput::from(*a.community);
    a.fits = fit_all(a.input, config.models);
    std::vector<ModelFit> ok;
    for (const auto& f : a.fits)
        if (f.fit) ok.push_back(*f.fit);
    try {
        a.selected = select(ok, config.policy);
    } catch (const SelectionError& e) {
        a.errors.emplace_back(e.what());
    }
    return a;
}

inline std::vector<SubjectAnalysis> analyze_cohort(const std::vector<SubjectSeries>& cohort, const RunConfig& config,
                                                   bool fit) {
    std::vector<SubjectAnalysis> out;
    out.reserve(cohort.size());
    if (!config.parallel) {
        for (const auto& s : cohort) out.push_back(analyze_subject(s, config, fit));
        return out;
    }
    std::vector<std::future<SubjectAnalysis>> jobs;
    for (const auto& s : cohort)
        jobs.push_back(std::async(std::launch::async, [&s, &config, fit] { return analyze_subject(s, config, fit); }));
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

// ---------------------------------------------------------------------------
// Writers

namespace detail {

inline std::string safe_name(const std::string& id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '.' || c == '_';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

inline std::string num(double v) { return format_number(v); }

} // namespace detail

/// Header: sample, D_c, then "<species>:D_sd", "<species>:D_s" per roster
/// species. Species with any sentinel-replaced D_s get a trailing
/// "<species>:D_s_sentinel" 0/1 column.
inline std::string metrics_csv(const SubjectAnalysis& a) {
    std::vector<bool> flagged(a.series.species_count(), false);
    for (const auto& r : a.records)
        for (std::size_t i = 0; i < r.species.size(); ++i) flagged[i] = flagged[i] || r.species[i].sentinel;

    std::vector<std::string> header = {"sample", "D_c"};
    for (std::size_t i = 0; i < a.series.species_count(); ++i) {
        const auto& sp = a.series.species_ids[i];
        header.push_back(sp + ":D_sd");
        header.push_back(sp + ":D_s");
        if (flagged[i]) header.push_back(sp + ":D_s_sentinel");
    }
    CsvBuilder csv(header);
    for (const auto& r : a.records) {
        std::vector<std::string> row = {r.sample_id, detail::num(r.community)};
        for (std::size_t i = 0; i < r.species.size(); ++i) {
            row.push_back(detail::num(r.species[i].distance));
            row.push_back(detail::num(r.species[i].dominance));
            if (flagged[i]) row.push_back(r.species[i].sentinel ? "1" : "0");
        }
        csv.row(row);
    }
    return csv.str();
}

/// Header: t, sample, D_c, S_c, excluded, then "<species>:S_s" per species.
inline std::string stability_csv(const SubjectAnalysis& a) {
    std::vector<std::string> header = {"t", "sample", "D_c", "S_c", "note"};
    std::vector<StabilitySeries> species;
    for (std::size_t i = 0; i < a.series.species_count(); ++i) {
        header.push_back(a.series.species_ids[i] + ":S_s");
        species.push_back(species_stability(species_column(a.records, i), a.series.species_ids[i]));
    }
    CsvBuilder csv(header);
    if (!a.community) return csv.str();
    for (std::size_t t = 0; t < a.community->points.size(); ++t) {
        const auto& p = a.community->points[t];
        std::vector<std::string> row = {std::to_string(p.t), a.records[t].sample_id, detail::num(p.dominance),
                                        p.excluded ? "" : detail::num(p.stability), p.reason};
        for (const auto& s : species) {
            const auto& q = s.points[t];
            row.push_back(q.excluded ? "" : detail::num(q.stability));
        }
        csv.row(row);
    }
    return csv.str();
}

/// One row per subject: b, a, R for each index, then n; a trailing row holds
/// the mean over subjects without flags.
inline std::string compare_indices_csv(const std::vector<SubjectAnalysis>& cohort) {
    std::vector<std::string> header = {"subject"};
    for (auto k : kAllIndexKinds)
        for (const char* col : {"_b", "_a", "_R"}) header.push_back(std::string(index_name(k)) + col);
    header.push_back("n");
    header.push_back("flag");
    CsvBuilder csv(header);

    const std::size_t width = 3 * std::size(kAllIndexKinds) + 1;
    std::vector<double> sums(width, 0.0);
    std::vector<std::size_t> counts(width, 0);
    for (const auto& a : cohort) {
        std::vector<std::string> row = {a.subject_id};
        std::vector<std::string> flags;
        std::size_t col = 0;
        for (auto k : kAllIndexKinds) {
            try {
                if (a.empty_roster || a.records.empty()) throw PreconditionError("no usable samples");
                auto r = regress_dominance_vs_index(a.series, k);
                for (double v : {r.slope, r.intercept, r.correlation}) {
                    row.push_back(detail::num(v));
                    sums[col] += v;
                    ++counts[col++];
                }
            } catch (const AnalysisError& e) {
                for (int i = 0; i < 3; ++i) row.emplace_back("nan");
                col += 3;
                flags.push_back(std::string(index_name(k)) + ": " + e.what());
            }
        }
        const auto n = a.series.length();
        row.push_back(std::to_string(n));
        sums[col] += static_cast<double>(n);
        ++counts[col];
        std::sort(flags.begin(), flags.end());
        flags.erase(std::unique(flags.begin(), flags.end()), flags.end());
        row.push_back(detail::join(flags, "; "));
        csv.row(row);
    }
    if (!cohort.empty()) {
        std::vector<std::string> row = {"Mean"};
        for (std::size_t i = 0; i < width; ++i)
            row.push_back(counts[i] ? detail::num(sums[i] / static_cast<double>(counts[i])) : "nan");
        row.emplace_back("");
        csv.row(row);
    }
    return csv.str();
}

inline std::string fit_csv(ModelKind kind, const std::vector<SubjectAnalysis>& cohort, const SelectionPolicy& policy) {
    std::vector<std::string> header = {"subject", "n", "status"};
    for (auto name : parameter_names(kind)) {
        header.emplace_back(name);
        header.push_back("se_" + std::string(name));
    }
    header.insert(header.end(), {"r2", "r2_adj"});
    if (kind == ModelKind::Linear) header.emplace_back("R");
    if (kind == ModelKind::LinearQuadratic) header.insert(header.end(), {"b1", "c2"});
    if (kind == ModelKind::QuadraticQuadratic) header.insert(header.end(), {"c1", "c2"});
    header.insert(header.end(), {"residual_ss", "converged", "iterations", "valid", "reasons", "notes"});
    CsvBuilder csv(header);

    for (const auto& a : cohort) {
        std::vector<std::string> row = {a.subject_id, std::to_string(a.input.size())};
        auto it = std::find_if(a.fits.begin(), a.fits.end(), [kind](const auto& f) { return f.kind == kind; });
        if (it == a.fits.end() || !it->fit) {
            std::string status = "not fitted";
            if (it != a.fits.end()) status = "failed: " + it->error;
            else if (!a.errors.empty()) status = "failed: " + a.errors.front();
            else if (!a.series.analyzable()) status = "skipped: fewer than 2 samples";
            row.push_back(status);
            while (row.size() < header.size()) row.emplace_back("");
            csv.row(row);
            continue;
        }
        const auto& f = *it->fit;
        row.emplace_back("ok");
        for (std::size_t i = 0; i < f.params.values.size(); ++i) {
            row.push_back(detail::num(f.params[i]));
            row.push_back(detail::num(f.std_errors[i]));
        }
        row.push_back(detail::num(f.r2));
        row.push_back(f.r2_adj_defined ? detail::num(f.r2_adj) : "nan");
        if (kind == ModelKind::Linear) row.push_back(f.pearson_r ? detail::num(*f.pearson_r) : "nan");
        if (kind == ModelKind::LinearQuadratic) {
            row.push_back(detail::num(f.derived->b1));
            row.push_back(detail::num(f.derived->c2));
        }
        if (kind == ModelKind::QuadraticQuadratic) {
            row.push_back(detail::num(f.derived->c1));
            row.push_back(detail::num(f.derived->c2));
        }
        const auto rep = validate(f, policy);
        row.push_back(detail::num(f.residual_ss));
        row.push_back(f.converged ? "1" : "0");
        row.push_back(std::to_string(f.iterations));
        row.push_back(rep.valid ? "1" : "0");
        row.push_back(detail::join(rep.reasons, "; "));
        row.push_back(detail::join(f.notes, "; "));
        csv.row(row);
    }
    return csv.str();
}

inline std::string selection_csv(const std::vector<SubjectAnalysis>& cohort) {
    CsvBuilder csv({"subject", "kind", "label", "quality", "signs", "narrative", "sampled_regimes", "rationale",
                    "d_min", "d_max", "note"});
    for (const auto& a : cohort) {
        if (!a.selected) {
            csv.row({a.subject_id, "", "", "", "", "", "", "",
                     "", "", a.errors.empty() ? "not analyzable" : a.errors.front()});
            continue;
        }
        auto [lo, hi] = std::minmax_element(a.input.D.begin(), a.input.D.end());
        auto row = summarize_one({a.subject_id, *a.selected, *lo, *hi});
        csv.row({row.subject_id, std::string(kind_label(row.kind)), row.label, detail::num(row.quality), row.signs,
                 row.narrative, row.sampled_regimes, row.rationale, detail::num(*lo), detail::num(*hi),
                 asymptote_note(a.selected->fit.params)});
    }
    return csv.str();
}

inline std::string trajectory_csv(const Trajectory& tr) {
    CsvBuilder csv({"t", "D", "status"});
    for (std::size_t t = 0; t < tr.values.size(); ++t) {
        std::string status;
        if (t + 1 == tr.values.size()) status = std::string(status_label(tr.status));
        csv.row({std::to_string(t), detail::num(tr.values[t]), status});
    }
    return csv.str();
}

inline std::string fixed_points_csv(const ModelParams& p, const std::vector<FixedPoint>& numeric) {
    CsvBuilder csv({"source", "location", "multiplier", "verdict", "note"});
    for (const auto& fp : numeric)
        csv.row({"numeric", detail::num(fp.location), detail::num(fp.multiplier),
                 std::string(fixed_point_label(fp.verdict)), ""});
    if (is_piecewise(p.kind))
        for (const auto& q : qualitative_equilibria(p))
            csv.row({q.kind == PointKind::Joint ? "qualitative-joint" : "qualitative-vertex", detail::num(q.location),
                     "", std::string(verdict_label(q.verdict)),
                     q.branch + (q.on_branch ? "" : " (outside its branch)")});
    if (auto note = asymptote_note(p); !note.empty()) csv.row({"asymptote", "inf", "", "", note});
    return csv.str();
}

inline std::string model_svg(const SubjectAnalysis& a) {
    PlotSpec spec;
    spec.title = "Subject " + a.subject_id + ": community stability vs dominance";
    spec.x = a.input.D;
    spec.y = a.input.S;
    for (const auto& f : a.fits) {
        if (!f.fit) continue;
        auto params = f.fit->params;
        const bool sel = a.selected && a.selected->fit.kind() == f.kind;
        spec.curves.push_back({std::string(kind_label(f.kind)), [params](double D) { return eval_raw(params, D); }, sel});
    }
    return render_svg(spec);
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

struct Outputs {
    const RunConfig& config;
    CommandResult& result;

    void write(const std::filesystem::path& rel, const std::string& content) {
        const auto path = config.out_dir / rel;
        write_file_atomic(path, content);
        result.files.push_back(path);
    }
};

inline void write_run_info(Outputs& out, Command cmd) {
    const auto& c = out.config;
    static const char* names[] = {"metrics", "compare-indices", "fit", "select", "simulate", "report-all"};
    CsvBuilder csv({"key", "value"});
    csv.row({"command", names[static_cast<int>(cmd)]});
    csv.row({"input", c.input.filename().string()});
    csv.row({"min_total_reads", std::to_string(c.min_total_reads)});
    csv.row({"relative", c.relative ? "1" : "0"});
    std::vector<std::string> models;
    for (auto k : c.models) models.emplace_back(kind_slug(k));
    csv.row({"models", join(models, " ")});
    csv.row({"r2_min", num(c.policy.r2_min)});
    csv.row({"se_ratio_max", num(c.policy.ratio_max)});
    csv.row({"mag_max", num(c.policy.mag_max)});
    csv.row({"seed", std::to_string(c.seed)});
    out.write("run_info.csv", csv.str());
}

inline void simulate_subject(Outputs& out, const SubjectAnalysis& a, std::optional<double> initial, std::size_t steps,
                             bool plot) {
    if (!a.selected) throw AnalysisError("subject " + a.subject_id + " has no selected model");
    const auto& p = a.selected->fit.params;
    const double d0 = initial.value_or(a.records.front().community);
    const auto base = "simulate/" + safe_name(a.subject_id);
    auto tr = iterate(p, d0, steps);
    out.write(base + "_trajectory.csv", trajectory_csv(tr));
    const double hi = 2.0 * *std::max_element(a.input.D.begin(), a.input.D.end());
    out.write(base + "_fixed_points.csv", fixed_points_csv(p, fixed_points(p, 0.0, std::max(hi, 1.0))));
    if (plot) out.write(base + "_model.svg", model_svg(a));
}

} // namespace detail

inline CommandResult run_command(Command cmd, const RunConfig& config) {
    CommandResult result;
    std::vector<SubjectAnalysis> cohort;
    try {
        validate_config(config);
        const bool fit = cmd != Command::Metrics && cmd != Command::CompareIndices;
        cohort = analyze_cohort(load_cohort(config), config, fit);
    } catch (const InputError& e) {
        result.exit_code = 1;
        result.messages.emplace_back(e.what());
        return result;
    } catch (const std::exception& e) {
        result.exit_code = 2;
        result.messages.emplace_back(e.what());
        return result;
    }

    detail::Outputs out{config, result};
    auto note_errors = [&] {
        for (const auto& a : cohort)
            for (const auto& e : a.errors) {
                result.messages.push_back(a.subject_id + ": " + e);
                result.exit_code = 2;
            }
    };

    try {
        detail::write_run_info(out, cmd);
        const bool all = cmd == Command::ReportAll;
        if (cmd == Command::Metrics || all)
            for (const auto& a : cohort) out.write("metrics/" + detail::safe_name(a.subject_id) + ".csv", metrics_csv(a));
        if (all)
            for (const auto& a : cohort)
                if (!a.empty_roster && !a.records.empty())
                    out.write("stability/" + detail::safe_name(a.subject_id) + ".csv", stability_csv(a));
        if (cmd == Command::CompareIndices || all) out.write("compare_indices.csv", compare_indices_csv(cohort));
        if (cmd == Command::Fit || cmd == Command::Select || all)
            for (auto k : config.models)
                out.write("fits/fit_" + std::string(kind_slug(k)) + ".csv", fit_csv(k, cohort, config.policy));
        if (cmd == Command::Select || all) out.write("selection.csv", selection_csv(cohort));

        if (cmd == Command::Simulate) {
            if (!config.subject) throw InputError("simulate needs --subject");
            auto it = std::find_if(cohort.begin(), cohort.end(),
                                   [&](const auto& a) { return a.subject_id == *config.subject; });
            if (it == cohort.end()) throw InputError("unknown subject " + *config.subject);
            detail::simulate_subject(out, *it, config.initial, config.steps, config.plot);
        }
        if (all)
            for (const auto& a : cohort) {
                if (!a.selected) continue;
                try {
                    detail::simulate_subject(out, a, std::nullopt, config.steps, true);
                } catch (const AnalysisError& e) {
                    result.messages.push_back(a.subject_id + ": simulate: " + e.what());
                    result.exit_code = 2;
                }
            }
        note_errors();
    } catch (const InputError& e) {
        result.exit_code = 1;
        result.messages.emplace_back(e.what());
    } catch (const AnalysisError& e) {
        result.exit_code = 2;
        result.messages.emplace_back(e.what());
    }
    return result;
}

} // namespace domstab
