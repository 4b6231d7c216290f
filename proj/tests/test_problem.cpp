#include <doctest.h>

#include <cmath>
#include <functional>

#include "dra/problem.hpp"
#include "dra/rng.hpp"

using namespace dra;

namespace {

AgentSpec make_agent(int id, Vec a, Vec b, double c0, Vec lo, Vec hi) {
    AgentSpec ag;
    ag.id = id;
    ag.cost.a = std::move(a);
    ag.cost.b_shift = std::move(b);
    ag.cost.c0 = c0;
    ag.box.lo = std::move(lo);
    ag.box.hi = std::move(hi);
    ag.validate();
    return ag;
}

// Independent 1-D minimizer: coarse grid bracketing plus golden-section
// refinement, no use of the closed form.
double numeric_min_1d(const std::function<double(double)>& f, double lo, double hi) {
    const int grid = 2000;
    double best_x = lo, best_v = f(lo);
    for (int i = 1; i <= grid; ++i) {
        const double x = lo + (hi - lo) * i / grid;
        const double v = f(x);
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    }
    double a = std::max(lo, best_x - (hi - lo) / grid);
    double b = std::min(hi, best_x + (hi - lo) / grid);
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        if (f(c) < f(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return 0.5 * (a + b);
}

// g_i(lambda) = (1/div) * [lambda' s - min_theta (lambda' theta + f(theta))],
// inner minimum evaluated numerically per dimension.
double dual_fn_numeric(const AgentSpec& ag, const Vec& lambda, const Vec& s, int div) {
    double inner = ag.cost.c0;
    for (std::size_t d = 0; d < lambda.size(); ++d) {
        const double ad = ag.cost.a[d], bd = ag.cost.b_shift[d], ld = lambda[d];
        auto f = [&](double t) { return ld * t + ad * (t - bd) * (t - bd); };
        inner += f(numeric_min_1d(f, ag.box.lo[d], ag.box.hi[d]));
    }
    return (dot(lambda, s) - inner) / div;
}

}  // namespace

TEST_CASE("eval_cost basics") {
    CHECK(eval_cost(make_agent(0, {1}, {0}, 0, {-10}, {10}), {0}) == 0.0);
    CHECK(eval_cost(make_agent(0, {1}, {2}, 0, {-10}, {10}), {5}) == 9.0);
    CHECK(eval_cost(make_agent(0, {2, 1}, {1, 1}, 3, {-10, -10}, {10, 10}), {0, 0}) == 6.0);
    CHECK_THROWS(eval_cost(make_agent(0, {1}, {0}, 0, {-10}, {10}), {0, 0}));
}

TEST_CASE("eval_cost agrees with direct expansion on a grid") {
    const AgentSpec ag = make_agent(0, {2, 1}, {1, 1}, 3, {-5, -5}, {5, 5});
    for (double x = -5; x <= 5; x += 1.25) {
        for (double y = -5; y <= 5; y += 1.25) {
            const double expect = 2 * (x - 1) * (x - 1) + (y - 1) * (y - 1) + 3;
            CHECK(eval_cost(ag, {x, y}) == doctest::Approx(expect).epsilon(1e-14));
        }
    }
}

TEST_CASE("primal_argmin closed form") {
    const AgentSpec ag = make_agent(0, {1}, {0}, 0, {0}, {100});
    CHECK(primal_argmin(ag, {-100})[0] == doctest::Approx(50.0));
    CHECK(primal_argmin(ag, {0})[0] == doctest::Approx(0.0));
    CHECK(primal_argmin(ag, {-400})[0] == doctest::Approx(100.0));
    CHECK_THROWS(primal_argmin(ag, {0, 0}));
}

TEST_CASE("primal_argmin matches grid search") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = rng.uniform(0.5, 3.0);
        const double b = rng.uniform(-5.0, 5.0);
        const double lo = rng.uniform(-10.0, 0.0);
        const double hi = lo + rng.uniform(0.5, 15.0);
        const AgentSpec ag = make_agent(0, {a}, {b}, 0, {lo}, {hi});
        const double lambda = rng.uniform(-30.0, 30.0);
        auto objective = [&](double t) { return lambda * t + a * (t - b) * (t - b); };
        const double by_grid = numeric_min_1d(objective, lo, hi);
        CHECK(primal_argmin(ag, {lambda})[0] == doctest::Approx(by_grid).epsilon(1e-6));
    }
}

TEST_CASE("primal_argmin stays in the box and is monotone in lambda") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = rng.uniform(0.5, 3.0);
        const double b = rng.uniform(-5.0, 5.0);
        const double lo = rng.uniform(-8.0, 0.0);
        const double hi = lo + rng.uniform(0.1, 12.0);
        const AgentSpec ag = make_agent(0, {a}, {b}, 0, {lo}, {hi});
        double prev = primal_argmin(ag, {-50.0})[0];
        for (double lambda = -50.0; lambda <= 50.0; lambda += 2.5) {
            const double cur = primal_argmin(ag, {lambda})[0];
            CHECK(cur >= lo);
            CHECK(cur <= hi);
            CHECK(cur <= prev + 1e-12);  // nonincreasing in lambda
            prev = cur;
        }
    }
}

TEST_CASE("dual_gradient examples") {
    const AgentSpec ag = make_agent(0, {1}, {0}, 0, {0}, {100});
    const Vec s{50};
    CHECK(dual_gradient(ag, {-100}, s, 1)[0] == doctest::Approx(0.0));
    CHECK(dual_gradient(ag, {0}, s, 2)[0] == doctest::Approx(25.0));
}

TEST_CASE("dual_gradient matches central finite differences at interior argmin") {
    SplitMix64 rng(23);
    const double h = 1e-6;
    int checked = 0;
    while (checked < 40) {
        const double a = rng.uniform(0.5, 2.5);
        const double b = rng.uniform(-3.0, 3.0);
        const AgentSpec ag = make_agent(0, {a}, {b}, rng.uniform(-1.0, 1.0), {b - 20.0}, {b + 20.0});
        const Vec s{rng.uniform(-5.0, 5.0)};
        const int div = 1 + static_cast<int>(rng.uniform_int(4));
        const Vec lambda{rng.uniform(-10.0, 10.0)};
        const double t = primal_argmin(ag, lambda)[0];
        if (t <= ag.box.lo[0] + 1e-3 || t >= ag.box.hi[0] - 1e-3) continue;
        ++checked;
        const double fd =
            (dual_fn_numeric(ag, {lambda[0] + h}, s, div) - dual_fn_numeric(ag, {lambda[0] - h}, s, div)) / (2 * h);
        const double an = dual_gradient(ag, lambda, s, div)[0];
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("convexity_constants") {
    std::vector<AgentSpec> agents;
    agents.push_back(make_agent(0, {1}, {0}, 0, {0}, {10}));
    agents.push_back(make_agent(1, {1}, {1}, 0, {0}, {10}));
    const ProblemInstance inst(std::move(agents), {5});
    const auto [u, L] = convexity_constants(inst);
    CHECK(u == 2.0);
    CHECK(L == 2.0);

    std::vector<AgentSpec> mixed;
    SplitMix64 rng(3);
    for (int i = 0; i < 20; ++i) mixed.push_back(make_agent(i, {rng.uniform(1.0, 2.0)}, {2}, 0, {0}, {100}));
    const ProblemInstance inst2(std::move(mixed), {50});
    const auto [u2, L2] = convexity_constants(inst2);
    CHECK(u2 >= 2.0);
    CHECK(L2 <= 4.0);
    CHECK(u2 <= L2);
}

TEST_CASE("instance validation") {
    std::vector<AgentSpec> agents;
    agents.push_back(make_agent(0, {1}, {0}, 0, {0}, {10}));
    agents.push_back(make_agent(1, {1}, {0}, 0, {0}, {10}));
    CHECK_THROWS(ProblemInstance({make_agent(0, {1}, {0}, 0, {0}, {10})}, {50}));  // target unattainable
    CHECK_THROWS(ProblemInstance(std::vector<AgentSpec>(agents), {5}, {0, 1}));    // no honest agent
    CHECK_THROWS(ProblemInstance(std::vector<AgentSpec>(agents), {5}, {7}));       // id out of range
    const ProblemInstance ok(std::move(agents), {5}, {1});
    CHECK(ok.honest_count() == 1);
    CHECK(ok.honest_ids() == std::vector<int>{0});
}

TEST_CASE("negative curvature rejected") {
    AgentSpec ag;
    ag.id = 0;
    ag.cost.a = {-1.0};
    ag.cost.b_shift = {0.0};
    ag.box.lo = {0.0};
    ag.box.hi = {1.0};
    CHECK_THROWS(ag.validate());
    CHECK_THROWS(QuadraticCost::from_poly(0.0, 1.0, 0.0));
}

TEST_CASE("polynomial form normalization") {
    // eta t^2 + zeta t + xi == a (t-b)^2 + c0 pointwise.
    const QuadraticCost c = QuadraticCost::from_poly(0.05, 12.0, 30.0);
    for (double t = -50; t <= 450; t += 37.5) {
        const double poly = 0.05 * t * t + 12.0 * t + 30.0;
        const double canon = c.a[0] * (t - c.b_shift[0]) * (t - c.b_shift[0]) + c.c0;
        CHECK(poly == doctest::Approx(canon).epsilon(1e-12));
    }
}
