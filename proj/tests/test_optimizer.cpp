#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schemelab/analytic.hpp"
#include "schemelab/errors.hpp"
#include "schemelab/model.hpp"
#include "schemelab/optimizer.hpp"

using namespace schemelab;

namespace {

// Oracle: exhaustive (y, z) grid with x = w - z.
double best_on_grid(double w, int n) {
    double best = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            best = std::max(best, performance_iid(RewardRule::full_budget(w, w * i / n, w * j / n)).performance);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("numeric IID optimum") {
    const auto half = optimize_rule_iid(0.5);
    CHECK(half.rule.x == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(half.rule.y == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(half.rule.z) <= 1e-6);
    CHECK(half.performance == doctest::Approx(0.6875).epsilon(1e-9));
    CHECK(half.converged);
    CHECK_FALSE(half.theta);

    CHECK(optimize_rule_iid(1.0).performance == doctest::Approx(29.0 / 27.0).epsilon(1e-6));

    const auto zero = optimize_rule_iid(0.0);
    CHECK(zero.rule == RewardRule{0.0, 0.0, 0.0, Budget(0.0)});
    CHECK(zero.performance == 0.0);

    for (double w : {0.3, 0.7, 0.9, 1.2, 1.4}) {
        const auto r = optimize_rule_iid(w);
        CHECK(r.performance >= best_on_grid(w, 100) - 1e-12);
        CHECK(r.rule.feasible());
    }
    // The closed form matches the numeric optimum up to w = 1.
    for (double w : {0.2, 0.55, 0.7, 0.85, 0.99}) {
        const auto closed = optimal_rule_iid(w).rules.front();
        const auto r = optimize_rule_iid(w);
        CHECK(r.rule.y == doctest::Approx(closed.y).epsilon(1e-4));
        CHECK(r.rule.z == doctest::Approx(closed.z).epsilon(1e-4));
    }
}

TEST_CASE("optimum above unit budget is reported as z = w") {
    const auto r = optimize_rule_iid(1.2);
    CHECK(r.rule.z == doctest::Approx(1.2));
    CHECK(r.rule.x == doctest::Approx(0.0));
    // The stationary point of 2c + (1 - c) y with c = w - 1/2 - y^2/2.
    CHECK(r.rule.y == doctest::Approx((2.0 - std::sqrt(6.0 * 1.2 - 5.0)) / 3.0).epsilon(1e-5));
}

TEST_CASE("joint FGM optimum") {
    for (double w : {0.5, 1.2}) {
        const auto r = optimize_fgm(w);
        REQUIRE(r.theta);
        CHECK(r.theta->value() == -1.0);
    }
    const auto mid = optimize_fgm(0.93);
    REQUIRE(mid.theta);
    CHECK(mid.theta->value() > -1.0);
    CHECK(mid.theta->value() < 1.0);
    const auto at_zero = optimize_fgm_fixed_theta(0.93, FgmParameter(0.0));
    CHECK(mid.performance >= at_zero.performance - 1e-12);
    CHECK(mid.performance - at_zero.performance <= 0.01);
    CHECK(mid.performance ==
          doctest::Approx(fgm_performance(mid.rule, *mid.theta).performance).epsilon(1e-12));

    // theta = 0 reduces the fixed-theta search to the independent one.
    CHECK(optimize_fgm_fixed_theta(0.8, FgmParameter(0.0)).performance ==
          doctest::Approx(optimize_rule_iid(0.8).performance).epsilon(1e-9));
    CHECK_THROWS_AS(optimize_fgm(1.5), DomainError);
}

TEST_CASE("search configuration") {
    SearchConfig bad;
    bad.coarse_step = 0.0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    CHECK_THROWS_AS(optimize_rule_iid(0.5, bad), ParameterError);
    CHECK_THROWS_AS(optimize_rule_iid(-1.0), DomainError);
}

TEST_CASE("sweeps") {
    const auto one = sweep(0.5, 0.51, 0.01, SweepMode::Iid);
    REQUIRE(one.size() == 1);
    CHECK(one[0].w == 0.5);
    CHECK_FALSE(one[0].theta);
    const auto direct = optimize_rule_iid(0.5);
    CHECK(one[0].rule == direct.rule);
    CHECK(one[0].performance == direct.performance);

    const auto rows = sweep(0.1, 0.5, 0.1, SweepMode::Fgm);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].w == doctest::Approx(0.1 + 0.1 * static_cast<double>(i)));
        REQUIRE(rows[i].theta);
        CHECK(*rows[i].theta == -1.0);
    }
    for (const auto& r : sweep(0.3, 0.6, 0.1, SweepMode::FgmThetaZero)) {
        REQUIRE(r.theta);
        CHECK(*r.theta == 0.0);
    }

    // Thread count never changes the rows.
    SearchConfig four;
    four.threads = 4;
    const auto serial = sweep(0.6, 1.4, 0.1, SweepMode::Fgm);
    const auto parallel = sweep(0.6, 1.4, 0.1, SweepMode::Fgm, four);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].rule == parallel[i].rule);
        CHECK(serial[i].performance == parallel[i].performance);
        CHECK(serial[i].theta == parallel[i].theta);
    }

    CHECK_THROWS_AS(sweep(0.5, 0.4, 0.01, SweepMode::Iid), ParameterError);
    CHECK_THROWS_AS(sweep(0.1, 0.4, 0.0, SweepMode::Iid), ParameterError);
    CHECK(parse_sweep_mode("fgm_theta_zero") == SweepMode::FgmThetaZero);
    CHECK_FALSE(parse_sweep_mode("nope"));
    CHECK(to_string(SweepMode::Fgm) == "fgm");
}
