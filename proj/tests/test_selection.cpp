#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "domstab/selection.hpp"
#include "fixture_io.hpp"

using namespace domstab;

namespace {

using fixtures::printed_fit;

std::vector<ModelFit> scenario(const std::string& subject) {
    std::vector<ModelFit> fits;
    for (auto kind : kAllKinds) {
        auto t = fixtures::load(fixtures::table_for(kind));
        for (const auto& r : t.rows)
            if (r.text("subject") == subject) fits.push_back(printed_fit(kind, r));
    }
    return fits;
}

ModelFit simple(ModelKind kind, std::vector<double> values, std::vector<double> se, double r2) {
    ModelFit f;
    f.params = ModelParams(kind, std::move(values));
    f.std_errors = std::move(se);
    f.r2 = r2;
    if (kind == ModelKind::Linear) f.pearson_r = -std::sqrt(r2);
    if (is_piecewise(kind)) f.derived = derived_params(f.params);
    return f;
}

} // namespace

TEST_CASE("validity gates on printed rows") {
    auto s2 = fixtures::load("table_s2_logistic.csv");
    auto r408 = validate(printed_fit(ModelKind::Logistic, s2.subject("408")));
    REQUIRE_FALSE(r408.se_ok);
    REQUIRE_FALSE(r408.valid);
    REQUIRE(validate(printed_fit(ModelKind::Logistic, s2.subject("400"))).valid);
    // SE(r) = 9.893 on r = -0.647 stays inside the ratio bound
    REQUIRE(validate(printed_fit(ModelKind::Logistic, s2.subject("412"))).valid);

    auto huge = simple(ModelKind::Logistic, {15152070, 1, -0.3}, {1000, 1, 0.01}, 0.8);
    auto rep = validate(huge);
    REQUIRE_FALSE(rep.magnitude_ok);
    REQUIRE_FALSE(rep.valid);

    auto weak = simple(ModelKind::Linear, {1, -0.03}, {0.1, 0.001}, 0.25);
    auto w = validate(weak);
    REQUIRE_FALSE(w.r2_ok);
    REQUIRE_FALSE(w.reasons.empty());
}

TEST_CASE("the logistic shape parameter is exempt from the SE check") {
    auto f = simple(ModelKind::Logistic, {2, 1e-5, -0.5}, {0.1, 1.0, 0.05}, 0.9);
    REQUIRE(validate(f).valid);
    f.std_errors[2] = 100;
    REQUIRE_FALSE(validate(f).valid);
    REQUIRE(se_exempt(ModelKind::LogisticSine, 1));
    REQUIRE_FALSE(se_exempt(ModelKind::LinearQuadratic, 1));
}

TEST_CASE("selection reproduces the scripted subject scenarios") {
    auto t = fixtures::load("selection_scenarios.csv");
    for (const auto& row : t.rows) {
        const auto subject = row.text("subject");
        INFO("subject " << subject);
        std::set<ModelKind> rejected;
        if (!row.text("rejected_on_review").empty()) rejected.insert(parse_kind(row.text("rejected_on_review")));
        auto fits = scenario(subject);
        REQUIRE(fits.size() >= 2);
        auto sel = select(fits, {}, rejected);
        REQUIRE(kind_label(sel.fit.kind()) == row.text("expected"));
        REQUIRE(sel.rationale == "priority");
    }
}

TEST_CASE("selection fallbacks and errors") {
    auto lin = simple(ModelKind::Linear, {1.551, -0.033}, {0.182, 0.004}, 0.72);
    auto bad = simple(ModelKind::Logistic, {22.644, 1e-5, -1.813}, {2602.6, 0.0022, 2.562}, 0.78);
    auto s = select(std::vector<ModelFit>{bad, lin});
    REQUIRE(s.fit.kind() == ModelKind::Linear);
    REQUIRE(s.rationale == "backup");

    auto weak = simple(ModelKind::Linear, {1, -0.01}, {0.1, 0.1}, 0.1);
    auto s2 = select(std::vector<ModelFit>{bad, weak});
    REQUIRE(s2.rationale == "backup-invalid");
    REQUIRE_FALSE(s2.validity.valid);

    REQUIRE_THROWS_AS(select(std::vector<ModelFit>{}), SelectionError);
    REQUIRE_THROWS_AS(select(std::vector<ModelFit>{bad}), SelectionError);
}

TEST_CASE("selection properties") {
    auto fits = scenario("400");
    std::mt19937_64 rng(53);
    const auto base = select(fits).fit.kind();
    for (int i = 0; i < 20; ++i) {
        std::shuffle(fits.begin(), fits.end(), rng);
        REQUIRE(select(fits).fit.kind() == base);
    }

    // all valid -> Logistic
    std::vector<ModelFit> good = {
        simple(ModelKind::Linear, {1, -0.03}, {0.1, 0.001}, 0.8),
        simple(ModelKind::QuadraticQuadratic, {1, 1, 1, 30, 1, 1}, {0.1, 0.1, 0.1, 1, 0.1, 0.1}, 0.9),
        simple(ModelKind::Logistic, {2, 0.1, -0.3}, {0.1, 0.1, 0.01}, 0.8),
    };
    REQUIRE(select(good).fit.kind() == ModelKind::Logistic);

    // tightening thresholds never turns invalid into valid
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 500; ++i) {
        auto f = simple(ModelKind::Logistic, {u(rng) * 10, u(rng), -u(rng)}, {u(rng) * 50, u(rng), u(rng) * 5},
                        u(rng));
        SelectionPolicy loose{0.2 + 0.2 * u(rng), 5 + 30 * u(rng), 1e6};
        SelectionPolicy tight{loose.r2_min + 0.1 * u(rng), loose.ratio_max * u(rng), loose.mag_max * u(rng)};
        if (!validate(f, loose).valid) REQUIRE_FALSE(validate(f, tight).valid);
    }
}

TEST_CASE("summary rows carry labels, signs and narratives") {
    auto s5 = fixtures::load("table_s5_lq.csv");
    auto f408 = printed_fit(ModelKind::LinearQuadratic, s5.subject("408"));
    auto row = summarize_one({"408", {f408, validate(f408), "priority"}, 10, 60});
    REQUIRE(row.label == "L-Q [0.85; b1 < 0, c2 > 0]");
    REQUIRE(row.narrative == "DDS followed by a possible equilibrium and DIS");

    auto s2 = fixtures::load("table_s2_logistic.csv");
    auto f400 = printed_fit(ModelKind::Logistic, s2.subject("400"));
    auto r400 = summarize_one({"400", {f400, validate(f400), "priority"}, 11.194, 59.687});
    REQUIRE(r400.label == "Logistic (0.91)");
    REQUIRE(r400.narrative == "DDS with an asymptotic equilibrium line when D_c → ∞");
    REQUIRE(r400.sampled_regimes == "DDS");

    auto s6 = fixtures::load("table_s6_qq.csv");
    auto f446 = printed_fit(ModelKind::QuadraticQuadratic, s6.subject("446"));
    auto r446 = summarize_one({"446", {f446, validate(f446), "priority"}, 20, 65});
    REQUIRE(r446.label == "Q-Q [0.59; c1 < 0, c2 < 0]");
    REQUIRE(r446.narrative ==
            "DDS and DIS alternate, two parabolas connected at D_c = d ≈ 43, stability of equilibriums is uncertain.");

    auto lin = simple(ModelKind::Linear, {1.551, -0.033}, {0.182, 0.004}, 0.7056);
    auto rl = summarize_one({"405", {lin, validate(lin), "backup"}, 20, 60});
    REQUIRE(rl.label == "Linear (R=0.84)");
    REQUIRE(rl.narrative == "Globally DDS, but the mechanism may be complex locally.");

    auto f420 = printed_fit(ModelKind::LogisticSine, fixtures::load("table_s3_logistic_sine.csv").subject("420"));
    auto r420 = summarize_one({"420", {f420, validate(f420), "priority"}, 15, 60});
    REQUIRE(r420.label == "Logistic-Sine (0.71)");
    REQUIRE(r420.narrative == "DDS and DIS alternate periodically");

    REQUIRE(summarize(std::vector<SubjectSelection>{}).empty());
}
