#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "domstab/dynamics.hpp"
#include "fixture_io.hpp"

using namespace domstab;
using Catch::Matchers::WithinAbs;

namespace {
const auto p405 = linear(1.551, -0.033);
}

TEST_CASE("linear subject 405 converges to its fixed point") {
    for (double d0 : {30.0, 60.0}) {
        auto tr = iterate(p405, d0, 200);
        REQUIRE(tr.status == TrajectoryStatus::Converged);
        REQUIRE(tr.values.front() == d0);
        REQUIRE_THAT(tr.limit, WithinAbs(47.0, 1e-6));
    }
    auto fps = fixed_points(p405, 0, 100);
    REQUIRE(fps.size() == 1);
    REQUIRE_THAT(fps[0].location, WithinAbs(47.0, 1e-9));
    REQUIRE_THAT(fps[0].multiplier, WithinAbs(-0.551, 1e-9));
    REQUIRE(fps[0].verdict == FixedPointVerdict::Stable);
}

TEST_CASE("trajectory edge cases") {
    auto still = iterate(linear(0, 0), 12.5, 10);
    REQUIRE(still.status == TrajectoryStatus::Converged);
    REQUIRE(still.event_step == 1);
    REQUIRE(still.values == std::vector<double>{12.5, 12.5});

    auto crash = iterate(linear(-2, 0), 10, 10);
    REQUIRE(crash.status == TrajectoryStatus::Collapsed);
    REQUIRE(crash.event_step == 1);
    REQUIRE(crash.values.back() <= 0);

    // multiplier 1 - 2.2 = -1.2: the fixed point repels into a 2-cycle
    auto cyc = iterate(linear(2.2, -2.2 / 47), 40, 5000);
    REQUIRE(cyc.status == TrajectoryStatus::Oscillating);

    auto slow = iterate(linear(0.001, -0.001 / 47), 10, 5);
    REQUIRE(slow.status == TrajectoryStatus::MaxSteps);
    REQUIRE(slow.values.size() == 6);

    try {
        iterate(linear(1e300, 0), 1e10, 10);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        REQUIRE(e.step() == 1);
    }
    REQUIRE_THROWS_AS(iterate(p405, 0, 10), PreconditionError);
    REQUIRE_THROWS_AS(iterate(p405, 10, 0), PreconditionError);
}

TEST_CASE("map consistency holds exactly") {
    auto p = quadratic_quadratic(-12.71, 0.572, -0.0066, 43.061, -0.0027, 0.333);
    auto tr = iterate(p, 30, 300);
    for (std::size_t t = 0; t + 1 < tr.values.size(); ++t)
        REQUIRE(tr.values[t + 1] == tr.values[t] * (1 + eval(p, tr.values[t])));
}

TEST_CASE("fixed point scans") {
    REQUIRE(fixed_points(logistic(4.741, 0.026, -0.206), 0, 100).empty());
    REQUIRE_FALSE(asymptote_note(logistic(4.741, 0.026, -0.206)).empty());
    REQUIRE(asymptote_note(p405).empty());

    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    auto sine = fixed_points(logistic_sine(-0.294, -1.677, 0.048), 1, 25);
    REQUIRE(sine.size() == 2);
    REQUIRE_THAT(sine[0].location, WithinAbs(pi2, 1e-8));
    REQUIRE_THAT(sine[1].location, WithinAbs(2 * pi2, 1e-8));

    // logistic-sine with a < 0 has a pole; the sign change there is not a root
    auto pole = logistic_sine(1, -2, 0.1);
    for (const auto& fp : fixed_points(pole, 0.5, 25)) REQUIRE(std::abs(eval(pole, fp.location)) < kRootTolerance);

    REQUIRE_THROWS_AS(fixed_points(p405, -1, 5), PreconditionError);
    REQUIRE_THROWS_AS(fixed_points(p405, 5, 5), PreconditionError);
}

TEST_CASE("fixed point properties on random models") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(-1, 1), pos(10, 50);
    int stable_checked = 0;
    for (int i = 0; i < 300; ++i) {
        ModelParams p = i % 3 == 0   ? linear(0.5 * std::abs(u(rng)) + 0.1, -0.02 * (1.1 + u(rng)))
                        : i % 3 == 1 ? linear_quadratic(u(rng), 0.05 * u(rng), 0.001 * u(rng), pos(rng), 0.05 * u(rng))
                                     : quadratic_quadratic(u(rng), 0.05 * u(rng), 0.001 * u(rng), pos(rng),
                                                           0.001 * u(rng), 0.05 * u(rng));
        for (const auto& fp : fixed_points(p, 0, 100)) {
            REQUIRE(std::abs(eval(p, fp.location)) < kRootTolerance);
            REQUIRE(std::abs(map_step(p, fp.location) - fp.location) < 1e-8);
            if (fp.verdict != FixedPointVerdict::Stable || std::abs(fp.multiplier) > 0.95) continue;
            if (is_piecewise(p.kind) && std::abs(fp.location - p[kJointIndex]) < 2) continue;
            for (double f : {0.99, 1.01}) {
                auto tr = iterate(p, fp.location * f, 20000);
                if (tr.status == TrajectoryStatus::Converged) {
                    REQUIRE(std::abs(tr.limit - fp.location) < 1e-6);
                    ++stable_checked;
                }
            }
        }
    }
    REQUIRE(stable_checked > 20);
}

TEST_CASE("resilience from the linear fixtures") {
    auto t = fixtures::load("table_s4_linear.csv");
    double steepest = 0, flattest = 1e9;
    std::string steep_id, flat_id;
    for (const auto& row : t.rows) {
        ModelFit f;
        f.params = fixtures::params_from(ModelKind::Linear, row);
        auto r = resilience(f);
        REQUIRE(r.slope == row.num("b"));
        REQUIRE(r.magnitude == std::abs(r.slope));
        if (r.magnitude > steepest) steepest = r.magnitude, steep_id = row.text("subject");
        if (r.magnitude < flattest) flattest = r.magnitude, flat_id = row.text("subject");
    }
    REQUIRE(steep_id == "412");
    REQUIRE(flat_id == "443");
    REQUIRE(steepest / flattest > 15);

    ModelFit lq;
    lq.params = linear_quadratic(1, 1, 1, 1, 1);
    REQUIRE_THROWS_AS(resilience(lq), KindError);
}
