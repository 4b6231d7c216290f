#include <doctest.h>

#include <cmath>
#include <limits>

#include "dra/graph.hpp"
#include "dra/rng.hpp"
#include "dra/theory.hpp"

using namespace dra;

namespace {

AgentSpec make_agent(int id, double a, double b, double lo, double hi) {
    AgentSpec ag;
    ag.id = id;
    ag.cost.a = {a};
    ag.cost.b_shift = {b};
    ag.box.lo = {lo};
    ag.box.hi = {hi};
    return ag;
}

TheoryConstants constants_for(double u_f, double L_f, int J, int H, double kt, double k, double rho, double chi,
                              double delta) {
    TheoryConstants c;
    c.u_f = u_f;
    c.L_f = L_f;
    c.total_agents = J;
    c.honest_agents = H;
    c.kappa_tilde = kt;
    c.kappa = k;
    c.rho = rho;
    c.chi_sq = chi;
    c.delta = delta;
    return c;
}

}  // namespace

TEST_CASE("delta bound") {
    // All boxes a single identical point.
    std::vector<AgentSpec> points{make_agent(0, 1, 5, 5, 5), make_agent(1, 1, 5, 5, 5)};
    const ProblemInstance degenerate(std::move(points), {5.0});
    CHECK(delta_bound(degenerate, DeltaMode::analytic) == doctest::Approx(0.0));
    CHECK(delta_bound(degenerate, DeltaMode::sampled, 200, 1) == doctest::Approx(0.0));

    std::vector<AgentSpec> pair{make_agent(0, 1, 0, 0, 100), make_agent(1, 1, 0, 0, 100)};
    const ProblemInstance two(std::move(pair), {50.0});
    CHECK(delta_bound(two, DeltaMode::analytic) == doctest::Approx(50.0));

    // Sampled never exceeds analytic.
    SplitMix64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(4));
        std::vector<AgentSpec> agents;
        double lo_sum = 0, hi_sum = 0;
        for (int i = 0; i < n; ++i) {
            const double b = rng.uniform(-5.0, 5.0);
            const double lo = b - rng.uniform(1.0, 8.0);
            const double hi = b + rng.uniform(1.0, 8.0);
            agents.push_back(make_agent(i, rng.uniform(0.5, 2.0), b, lo, hi));
            lo_sum += lo;
            hi_sum += hi;
        }
        const double s = rng.uniform(lo_sum / n, hi_sum / n);
        const ProblemInstance inst(std::move(agents), {s});
        const double analytic = delta_bound(inst, DeltaMode::analytic);
        const double sampled = delta_bound(inst, DeltaMode::sampled, 100, trial);
        CHECK(sampled <= analytic + 1e-12);
    }
}

TEST_CASE("dual radius formula") {
    CHECK(theorem2_dual_radius(1.0, 1, 1.0, 1.0, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(theorem2_dual_radius(1.0, 1, 1.0, 1.0, 0.0, 1.0) == doctest::Approx(std::sqrt(1920.0)).epsilon(1e-12));
    CHECK(std::isinf(theorem2_dual_radius(1.0, 4, 0.5, -0.2, 0.5, 0.0)));
}

TEST_CASE("primal radius formula") {
    CHECK(theorem2_primal_radius(1.0, 2.0, 1, 1.0, 1.0, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(theorem2_primal_radius(1.0, 2.0, 1, 1.0, 1.0, 0.0, 1.0) ==
          doctest::Approx(0.5 * std::sqrt(1920.0)).epsilon(1e-12));

    // primal = dual / (u_f * H) across random parameter draws.
    SplitMix64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double delta = rng.uniform(0.1, 5.0);
        const int H = 1 + static_cast<int>(rng.uniform_int(50));
        const double beta = rng.uniform(0.01, 1.0);
        const double eps = rng.uniform(0.05, 0.95);
        const double rho = rng.uniform(0.0, 0.1);
        const double chi = rng.uniform(0.0, 0.5);
        const double u_f = rng.uniform(0.5, 4.0);
        const double dual = theorem2_dual_radius(delta, H, beta, eps, rho, chi);
        const double primal = theorem2_primal_radius(delta, u_f, H, beta, eps, rho, chi);
        CHECK(primal == doctest::Approx(dual / (u_f * H)).epsilon(1e-10));
    }
}

TEST_CASE("alpha beta identity") {
    SplitMix64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const double u = rng.uniform(0.1, 3.0);
        const double L = u + rng.uniform(0.0, 3.0);
        const TheoryConstants c = constants_for(u, L, 30, 20, 0.5, 0.5, 0.0, 0.0, 1.0);
        CHECK(c.alpha() * c.beta() == doctest::Approx(u * L / ((u + L) * (u + L))).epsilon(1e-12));
        CHECK(c.alpha() * c.beta() <= 0.25 + 1e-12);
        CHECK(c.alpha_tilde() * c.beta_tilde() == doctest::Approx(c.alpha() * c.beta()).epsilon(1e-12));
    }
}

TEST_CASE("radius monotonicity") {
    const double base = theorem2_dual_radius(1.0, 9, 0.25, 0.5, 0.01, 0.1);
    CHECK(theorem2_dual_radius(1.5, 9, 0.25, 0.5, 0.01, 0.1) >= base);
    CHECK(theorem2_dual_radius(1.0, 9, 0.25, 0.5, 0.02, 0.1) >= base);
    CHECK(theorem2_dual_radius(1.0, 9, 0.25, 0.5, 0.01, 0.2) >= base);
    CHECK(theorem2_dual_radius(1.0, 9, 0.25, 0.4, 0.01, 0.1) >= base);  // smaller epsilon inflates
}

TEST_CASE("rho condition matches epsilon sign") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const int H = 1 + static_cast<int>(rng.uniform_int(100));
        const double kappa = rng.uniform(0.0, 0.999);
        const double rho = rng.uniform(0.0, 0.2);
        TheoryConstants c = constants_for(2.0, 4.0, H + 3, H, 0.5, kappa, rho, 0.0, 1.0);
        const bool condition = rho < (1.0 - kappa) / (8.0 * std::sqrt(static_cast<double>(H)));
        CHECK(c.rho_condition_ok() == condition);
        CHECK((c.epsilon() > 0.0) == condition);
    }
}

TEST_CASE("step size admissibility for the attack-free schedule at its floor") {
    // sigma-consistent floor: every condition holds when k0 sits at the bound.
    const TheoryConstants c = constants_for(2.0, 4.0, 20, 20, 0.6, 0.6, 0.0, 0.0, 1.0);
    const double floor = stepsize_admissible_fn([](int) { return 1.0; }, -1, c, TheoremId::theorem1, 0).k0_floor;
    REQUIRE(floor > 2.0);
    const int k0 = static_cast<int>(std::ceil(floor));
    const StepSchedule sched = StepSchedule::theorem(2.0 / c.beta_tilde(), k0);
    const StepSizeVerdicts v = stepsize_admissible(sched, c, TheoremId::theorem1, 500);
    for (const ConditionVerdict& cond : v.conditions) {
        INFO(cond.name);
        CHECK(cond.pass);
    }
    CHECK(v.all_pass);

    // One below the floor violates at least one condition.
    const StepSchedule tight = StepSchedule::theorem(2.0 / c.beta_tilde(), std::max(2, k0 / 4));
    CHECK_FALSE(stepsize_admissible(tight, c, TheoremId::theorem1, 500).all_pass);
}

TEST_CASE("step size admissibility for the resilient schedule") {
    const TheoryConstants c = constants_for(2.0, 4.0, 24, 20, 0.6, 0.6, 0.004, 0.0, 1.0);
    REQUIRE(c.epsilon() > 0.0);
    const StepSizeVerdicts probe = stepsize_admissible_fn([](int) { return 1.0; }, -1, c, TheoremId::theorem2, 0);
    REQUIRE(probe.k0_floor > 0.0);

    // The stated floor is not sufficient for the consensus-contraction
    // condition (it misses a 2/eps factor); a large enough offset passes all
    // conditions, including the floor itself.
    const double eps = c.epsilon();
    const double strict = probe.k0_floor * std::max(1.0, 2.0 / eps);
    const int k0 = static_cast<int>(std::ceil(strict)) + 1;
    const StepSchedule sched = StepSchedule::theorem(4.0 / (c.beta() * c.honest_agents / c.total_agents), k0);
    const StepSizeVerdicts v = stepsize_admissible(sched, c, TheoremId::theorem2, 500);
    for (const ConditionVerdict& cond : v.conditions) {
        INFO(cond.name);
        CHECK(cond.pass);
    }

    // Power schedules keep the step nonincreasing; the ratio upper bound is a
    // separate numeric question (it fails near k=0 for small epsilon).
    const StepSizeVerdicts pv = stepsize_admissible(StepSchedule::power(0.1), c, TheoremId::theorem2, 2000);
    for (const ConditionVerdict& cond : pv.conditions) {
        if (cond.name == "decay_ratio_lower") CHECK(cond.pass);
    }

    // Constant step size: both ratio conditions pass with equality.
    const StepSizeVerdicts cv =
        stepsize_admissible_fn([](int) { return 0.5; }, -1, c, TheoremId::theorem2, 100);
    for (const ConditionVerdict& cond : cv.conditions) {
        if (cond.name == "decay_ratio_lower" || cond.name == "decay_ratio_upper") CHECK(cond.pass);
    }
}

TEST_CASE("theory report assembles the pieces") {
    std::vector<AgentSpec> agents;
    SplitMix64 rng(2);
    for (int i = 0; i < 12; ++i) agents.push_back(make_agent(i, rng.uniform(1.0, 2.0), 2.0, 0.0, 100.0));
    const ProblemInstance inst(std::move(agents), {50.0}, {10, 11});
    const Topology topo = random_regular(12, 5, 4);
    const WeightMatrix full = metropolis_weights(topo);
    const HonestSubgraph sub = honest_subgraph(topo, inst.byzantine);
    REQUIRE(is_connected(sub.topology));
    const WeightMatrix E = metropolis_weights(sub.topology);

    TheoryConstants c;
    const auto [u, L] = convexity_constants(inst);
    c.u_f = u;
    c.L_f = L;
    c.total_agents = 12;
    c.honest_agents = 10;
    c.kappa_tilde = kappa(full, KappaVariant::full);
    c.kappa = kappa(E, KappaVariant::honest);
    c.chi_sq = chi_squared(E);
    c.rho = 0.0;
    c.delta = delta_bound(inst, DeltaMode::analytic);

    const TheoryReport r = make_theory_report(c, StepSchedule::power(0.1), 100);
    CHECK(r.rho_condition_ok);
    CHECK(r.epsilon == doctest::Approx(1.0 - c.kappa));
    CHECK(r.chi_sq == doctest::Approx(0.0).epsilon(1e-12));  // metropolis E is doubly stochastic
    CHECK(r.dual_radius == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.primal_radius == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.delta > 0.0);
    CHECK(r.alpha * r.beta <= 0.25 + 1e-12);
}
