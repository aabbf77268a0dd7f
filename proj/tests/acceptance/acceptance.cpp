// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion...]   (no arguments runs all nine)

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "domstab/domstab.hpp"
#include "fixture_io.hpp"
#include "recovery_cases.hpp"

using namespace domstab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double limit_ms;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome table1_identity() {
    auto t = fixtures::load("table1_subject400.csv");
    std::size_t checked = 0;
    double worst = 0;
    for (const auto& row : t.rows) {
        const double dc = row.num("D_c");
        for (std::size_t c = 2; c + 1 < t.header.size(); c += 2) {
            const double dsd = row.num(t.header[c]), ds = row.num(t.header[c + 1]);
            if (!std::isfinite(dsd) || !std::isfinite(ds)) continue;
            worst = std::max(worst, std::abs(dc - dsd - ds));
            ++checked;
        }
    }
    return {t.rows.size() == 29 && checked > 0 && worst <= 5e-3,
            std::to_string(t.rows.size()) + " rows, " + std::to_string(checked) +
                " finite entries, worst |D_c - D_sd - D_s| = " + fmt("%.4g", worst)};
}

Outcome simpson_oracle() {
    std::mt19937_64 rng(1000);
    std::uniform_int_distribution<int> len(1, 50), count(1, 10000);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> m(static_cast<std::size_t>(len(rng)));
        for (auto& x : m) x = count(rng);
        double total = 0, simpson = 0;
        for (double x : m) total += x;
        for (double x : m) simpson += (x / total) * (x / total);
        const double n = static_cast<double>(m.size());
        const double expected = n * simpson - n / total;
        const double dc = community_dominance(m);
        worst = std::max(worst, std::abs(dc - expected) / std::max(1.0, std::abs(expected)));
    }
    return {worst <= 1e-9, "1000 vectors, worst relative deviation " + fmt("%.3g", worst)};
}

Outcome fixed_total_line() {
    std::mt19937_64 rng(2143);
    SubjectSeries s;
    s.subject_id = "400";
    for (int i = 0; i < 60; ++i) s.species_ids.push_back("sp" + std::to_string(i));
    s.counts.assign(60, {});
    for (int t = 0; t < 29; ++t) {
        s.sample_ids.push_back("400_" + std::to_string(t));
        std::vector<Count> v(60, 1);
        Count left = 2143 - 60;
        const Count top = 200 + rng() % 1500;
        v[rng() % 60] += top;
        left -= top;
        for (; left > 0; --left) ++v[rng() % 60];
        for (int i = 0; i < 60; ++i) s.counts[i].push_back(v[i]);
    }
    auto r = regress_dominance_vs_index(s, IndexKind::Simpson);
    const bool ok = std::abs(r.correlation - 1) <= 1e-9 && std::abs(r.slope - 60) <= 1e-6 &&
                    std::abs(r.intercept + 60.0 / 2143) <= 1e-6;
    return {ok, "R = " + fmt("%.12f", r.correlation) + ", slope = " + fmt("%.9f", r.slope) +
                    ", intercept = " + fmt("%.9f", r.intercept)};
}

Outcome recovery_suite() {
    bool ok = true;
    std::string detail;
    for (const auto& c : recovery::cases()) {
        auto fit = fit_model(c.truth.kind, recovery::generate(c.truth, c.lo, c.hi));
        const double err = recovery::worst_relative_error(fit.params, c.truth);
        ok = ok && err <= c.rel_tol;
        detail += (detail.empty() ? "" : ", ") + c.subject + " " + std::string(kind_label(c.truth.kind)) + " " +
                  fmt("%.2g", err);
    }
    return {ok, "worst relative parameter error: " + detail};
}

Outcome derived_columns() {
    struct Check {
        ModelKind kind;
        const char* first;
    };
    std::size_t checked = 0;
    double worst = 0;
    std::vector<std::string> misses;
    for (auto [kind, first] : {Check{ModelKind::LinearQuadratic, "b1"}, Check{ModelKind::QuadraticQuadratic, "c1"}}) {
        auto t = fixtures::load(fixtures::table_for(kind));
        for (const auto& row : t.rows) {
            const auto dp = derived_params(fixtures::params_from(kind, row));
            const double mine[] = {kind == ModelKind::LinearQuadratic ? dp.b1 : dp.c1, dp.c2};
            const double printed[] = {row.num(first), row.num("c2")};
            const char* names[] = {first, "c2"};
            for (int k = 0; k < 2; ++k) {
                const double diff = std::abs(mine[k] - printed[k]);
                worst = std::max(worst, diff);
                ++checked;
                if (diff > 1e-3)
                    misses.push_back(row.text("subject") + " " + names[k] + " computed " + fmt("%.6g", mine[k]) +
                                     " printed " + fmt("%.6g", printed[k]));
            }
        }
    }
    std::string detail = std::to_string(checked) + " values, worst deviation " + fmt("%.4g", worst);
    for (const auto& m : misses) detail += "; " + m;
    return {misses.empty() && checked > 0, detail};
}

Outcome selection_policy() {
    auto s2 = fixtures::load("table_s2_logistic.csv");
    const bool rejects_408 = !validate(fixtures::printed_fit(ModelKind::Logistic, s2.subject("408"))).valid;
    const bool accepts_400 = validate(fixtures::printed_fit(ModelKind::Logistic, s2.subject("400"))).valid;
    ModelFit huge;
    huge.params = logistic(15152070, 1, -0.3);
    huge.std_errors = {1000, 1, 0.01};
    huge.r2 = 0.8;
    const bool rejects_huge = !validate(huge).valid;

    auto scenarios = fixtures::load("selection_scenarios.csv");
    std::size_t matched = 0;
    std::string wrong;
    for (const auto& row : scenarios.rows) {
        const auto subject = row.text("subject");
        std::vector<ModelFit> fits;
        for (auto kind : kAllKinds) {
            auto t = fixtures::load(fixtures::table_for(kind));
            for (const auto& r : t.rows)
                if (r.text("subject") == subject) fits.push_back(fixtures::printed_fit(kind, r));
        }
        std::set<ModelKind> rejected;
        if (!row.text("rejected_on_review").empty()) rejected.insert(parse_kind(row.text("rejected_on_review")));
        const auto got = std::string(kind_label(select(fits, {}, rejected).fit.kind()));
        if (got == row.text("expected")) ++matched;
        else wrong += " " + subject + "->" + got;
    }
    const bool ok = rejects_408 && accepts_400 && rejects_huge && matched == scenarios.rows.size();
    return {ok, std::string("408 logistic ") + (rejects_408 ? "rejected" : "ACCEPTED") + ", K=15152070 " +
                    (rejects_huge ? "rejected" : "ACCEPTED") + ", 400 logistic " +
                    (accepts_400 ? "accepted" : "REJECTED") + ", scenarios " + std::to_string(matched) + "/" +
                    std::to_string(scenarios.rows.size()) + wrong};
}

Outcome dynamics_405() {
    const auto p = linear(1.551, -0.033);
    auto fps = fixed_points(p, 0, 100);
    bool ok = fps.size() == 1 && std::abs(fps[0].location - 47.0) <= 1e-6 &&
              std::abs(fps[0].multiplier + 0.551) <= 1e-3 && fps[0].verdict == FixedPointVerdict::Stable;
    std::string detail = fps.empty() ? "no fixed point"
                                     : "D* = " + fmt("%.9f", fps[0].location) + ", multiplier " +
                                           fmt("%.6f", fps[0].multiplier);
    for (double d0 : {30.0, 60.0}) {
        auto tr = iterate(p, d0, 500);
        const bool conv = tr.status == TrajectoryStatus::Converged && std::abs(tr.limit - 47.0) <= 1e-4;
        ok = ok && conv;
        detail += ", from " + fmt("%g", d0) + ": " + std::string(status_label(tr.status)) + " at step " +
                  std::to_string(tr.event_step);
    }
    auto t = fixtures::load("table_s4_linear.csv");
    double hi = 0, lo = 1e300;
    for (const auto& row : t.rows) {
        ModelFit f;
        f.params = fixtures::params_from(ModelKind::Linear, row);
        const double m = resilience(f).magnitude;
        hi = std::max(hi, m);
        lo = std::min(lo, m);
    }
    ok = ok && lo > 0 && hi / lo > 15;
    return {ok, detail + ", resilience ratio " + fmt("%.4g", hi) + "/" + fmt("%.4g", lo) + " = " +
                    fmt("%.2f", hi / lo)};
}

Outcome piecewise_continuity() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1), joint(5, 70), where(0, 80);
    double worst_gap = 0, worst_slope = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto p = i % 2 ? linear_quadratic(15 * u(rng), u(rng), 0.01 * u(rng), joint(rng), u(rng))
                             : quadratic_quadratic(15 * u(rng), u(rng), 0.01 * u(rng), joint(rng), 0.01 * u(rng),
                                                   u(rng));
        const auto dp = derived_params(p);
        const double d = dp.joint;
        const double left = dp.a1 + dp.b1 * d + dp.c1 * d * d, right = dp.a2 + dp.b2 * d + dp.c2 * d * d;
        const double sides = std::abs(eval(p, std::nextafter(d, 0.0)) - eval(p, std::nextafter(d, 1e9)));
        worst_gap = std::max({worst_gap, std::abs(left - right), sides});
        for (int k = 0; k < 4; ++k) {
            const double D = where(rng);
            if (std::abs(D - d) < 1e-3) continue;
            const double h = 1e-5;
            const double fd = (eval(p, D + h) - eval(p, D - h)) / (2 * h);
            worst_slope = std::max(worst_slope, std::abs(derivative(p, D) - fd));
        }
    }
    return {worst_gap < 1e-9 && worst_slope <= 1e-6,
            "10000 draws, worst branch mismatch " + fmt("%.3g", worst_gap) + ", worst derivative error " +
                fmt("%.3g", worst_slope)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome end_to_end() {
    const auto root = fs::temp_directory_path() / "domstab_acceptance";
    fs::remove_all(root);
    RunConfig c;
    c.input = DOMSTAB_DATA "/synthetic_cohort.csv";
    std::string detail;
    for (const char* run : {"first", "second"}) {
        c.out_dir = root / run;
        auto res = run_command(Command::ReportAll, c);
        if (res.exit_code != 0) {
            for (const auto& m : res.messages) detail += " " + m;
            return {false, std::string(run) + " run exited " + std::to_string(res.exit_code) + ":" + detail};
        }
    }
    std::size_t csv = 0, svg = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "first")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root / "first");
        if (e.path().extension() == ".csv") ++csv;
        if (e.path().extension() == ".svg") ++svg;
        if (!fs::exists(root / "second" / rel) || slurp(e.path()) != slurp(root / "second" / rel)) ++differing;
    }
    std::size_t second = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "second")) second += e.is_regular_file();
    // run info, 5 metrics, 5 stability, compare, 5 fits, selection, 5 trajectories, 5 fixed-point tables
    const bool ok = csv == 28 && svg == 5 && differing == 0 && second == csv + svg;
    fs::remove_all(root);
    return {ok, std::to_string(csv) + " CSVs, " + std::to_string(svg) + " SVGs, " + std::to_string(differing) +
                    " differing between runs"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "reference identity D_c = D_sd + D_s", 1000, table1_identity},
        {2, "Simpson linearity oracle", 1000, simpson_oracle},
        {3, "fixed-total Simpson regression", 1000, fixed_total_line},
        {4, "generate-then-fit recovery", 5000, recovery_suite},
        {5, "derived piecewise parameters", 1000, derived_columns},
        {6, "selection policy replication", 1000, selection_policy},
        {7, "linear dynamics and resilience", 1000, dynamics_405},
        {8, "piecewise continuity and derivatives", 5000, piecewise_continuity},
        {9, "end-to-end determinism", 10000, end_to_end},
    };
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.pass && ms < c.limit_ms;
        failures += !pass;
        std::printf("criterion %d %s: %s (%.0f ms, limit %.0f ms) %s\n", c.id, c.title, pass ? "PASS" : "FAIL", ms,
                    c.limit_ms, o.detail.c_str());
    }
    return failures ? 1 : 0;
}
