#include <doctest.h>

#include <cmath>

#include "dra/oracle.hpp"
#include "dra/rng.hpp"

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

// Small random instance whose optimal dual sits inside a modest range.
ProblemInstance random_instance(SplitMix64& rng, int max_agents, int max_dim) {
    const int n = 1 + static_cast<int>(rng.uniform_int(max_agents));
    const int D = 1 + static_cast<int>(rng.uniform_int(max_dim));
    std::vector<AgentSpec> agents;
    Vec mean_b(D, 0.0);
    for (int i = 0; i < n; ++i) {
        AgentSpec ag;
        ag.id = i;
        for (int d = 0; d < D; ++d) {
            ag.cost.a.push_back(rng.uniform(0.5, 2.0));
            ag.cost.b_shift.push_back(rng.uniform(-3.0, 3.0));
            ag.box.lo.push_back(ag.cost.b_shift.back() - rng.uniform(4.0, 10.0));
            ag.box.hi.push_back(ag.cost.b_shift.back() + rng.uniform(4.0, 10.0));
            mean_b[d] += ag.cost.b_shift.back() / n;
        }
        agents.push_back(std::move(ag));
    }
    Vec s(D);
    for (int d = 0; d < D; ++d) s[d] = mean_b[d] + rng.uniform(-2.0, 2.0);
    return ProblemInstance(std::move(agents), std::move(s));
}

double phi(const ProblemInstance& inst, const std::vector<int>& ids, double lambda, int d) {
    double acc = 0.0;
    for (int id : ids) acc += primal_argmin(inst.agents[id], Vec(inst.dim(), lambda))[d];
    return acc / static_cast<double>(ids.size());
}

}  // namespace

TEST_CASE("single-agent reference") {
    const ProblemInstance inst({make_agent(0, 1.0, 0.0, 0.0, 100.0)}, {50.0});
    const ReferenceSolution sol = solve_reference(inst, Subset::all);
    CHECK(sol.lambda_star[0] == doctest::Approx(-100.0).epsilon(1e-9));
    CHECK(sol.theta_star[0][0] == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(sol.residual[0] <= 1e-10);
    CHECK(check_kkt(inst, Subset::all, sol, 1e-8).pass());
}

TEST_CASE("interior optimum has zero dual") {
    const ProblemInstance inst({make_agent(0, 1.0, 10.0, 0.0, 100.0), make_agent(1, 1.0, 30.0, 0.0, 100.0)}, {20.0});
    const ReferenceSolution sol = solve_reference(inst, Subset::all);
    CHECK(sol.lambda_star[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.theta_star[0][0] == doctest::Approx(10.0));
    CHECK(sol.theta_star[1][0] == doctest::Approx(30.0));
}

TEST_CASE("infeasible target reported") {
    CHECK_THROWS(ProblemInstance({make_agent(0, 1.0, 0.0, 0.0, 10.0), make_agent(1, 1.0, 0.0, 0.0, 10.0)}, {50.0}));
    // Attainable by the honest subset but not by the full population.
    std::vector<AgentSpec> agents{make_agent(0, 1.0, 0.0, 0.0, 10.0), make_agent(1, 1.0, 95.0, 90.0, 100.0)};
    const ProblemInstance inst(std::move(agents), {95.0}, {0});
    CHECK_NOTHROW(solve_reference(inst, Subset::honest_only));
    CHECK_THROWS(solve_reference(inst, Subset::all));
}

TEST_CASE("honest-only subset solves the reduced problem") {
    std::vector<AgentSpec> agents{make_agent(0, 1.0, 0.0, 0.0, 100.0), make_agent(1, 2.0, 5.0, 0.0, 100.0),
                                  make_agent(2, 1.0, 80.0, 0.0, 100.0)};
    const ProblemInstance inst(std::move(agents), {20.0}, {2});
    const ReferenceSolution sol = solve_reference(inst, Subset::honest_only);
    CHECK(sol.agent_ids == std::vector<int>{0, 1});
    const double mean = (sol.theta_star[0][0] + sol.theta_star[1][0]) / 2.0;
    CHECK(mean == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(check_kkt(inst, Subset::honest_only, sol, 1e-8).pass());
}

TEST_CASE("bisection matches dense grid search") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const ProblemInstance inst = random_instance(rng, 5, 2);
        const ReferenceSolution sol = solve_reference(inst, Subset::all);
        std::vector<int> ids(inst.agents.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
        for (std::size_t d = 0; d < inst.dim(); ++d) {
            double best_lambda = 0.0, best_err = 1e300;
            for (double l = -25.0; l <= 25.0; l += 1e-4) {
                const double err = std::abs(phi(inst, ids, l, static_cast<int>(d)) - inst.s[d]);
                if (err < best_err) {
                    best_err = err;
                    best_lambda = l;
                }
            }
            CHECK(std::abs(sol.lambda_star[d] - best_lambda) <= 1e-3);
        }
    }
}

TEST_CASE("objective optimality against random feasible points") {
    SplitMix64 rng(57);
    const ProblemInstance inst = random_instance(rng, 5, 1);
    const ReferenceSolution sol = solve_reference(inst, Subset::all);
    double star_cost = 0.0;
    for (std::size_t i = 0; i < inst.agents.size(); ++i) star_cost += eval_cost(inst.agents[i], sol.theta_star[i]);

    const int n = inst.total_agents();
    int tested = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Vec> pts(n, Vec(1));
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
            pts[i][0] = rng.uniform(inst.agents[i].box.lo[0], inst.agents[i].box.hi[0]);
            mean += pts[i][0] / n;
        }
        // Project onto the mean-constraint hyperplane by a uniform shift.
        const double shift = inst.s[0] - mean;
        bool inside = true;
        for (int i = 0; i < n; ++i) {
            pts[i][0] += shift;
            if (pts[i][0] < inst.agents[i].box.lo[0] || pts[i][0] > inst.agents[i].box.hi[0]) inside = false;
        }
        if (!inside) continue;
        ++tested;
        double cost = 0.0;
        for (int i = 0; i < n; ++i) cost += eval_cost(inst.agents[i], pts[i]);
        CHECK(star_cost <= cost + 1e-9);
    }
    CHECK(tested > 50);
}

TEST_CASE("phi is monotone nonincreasing") {
    SplitMix64 rng(91);
    const ProblemInstance inst = random_instance(rng, 5, 1);
    std::vector<int> ids(inst.agents.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    double prev = phi(inst, ids, -50.0, 0);
    for (double l = -50.0; l <= 50.0; l += 0.5) {
        const double cur = phi(inst, ids, l, 0);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("kkt check flags corrupted solutions") {
    const ProblemInstance inst(
        {make_agent(0, 1.0, 0.0, 0.0, 100.0), make_agent(1, 1.5, 10.0, 0.0, 100.0)}, {30.0});
    const ReferenceSolution good = solve_reference(inst, Subset::all);
    CHECK(check_kkt(inst, Subset::all, good, 1e-8).pass());

    ReferenceSolution bad_lambda = good;
    bad_lambda.lambda_star[0] += 1.0;
    bad_lambda.theta_star[0] = primal_argmin(inst.agents[0], bad_lambda.lambda_star);
    bad_lambda.theta_star[1] = primal_argmin(inst.agents[1], bad_lambda.lambda_star);
    CHECK_FALSE(check_kkt(inst, Subset::all, bad_lambda, 1e-8).stationary);

    ReferenceSolution bad_theta = good;
    bad_theta.theta_star[0][0] = inst.agents[0].box.hi[0] + 5.0;  // outside the box
    CHECK_FALSE(check_kkt(inst, Subset::all, bad_theta, 1e-8).argmin_consistent);
}

TEST_CASE("degenerate plateau is flagged") {
    // Both agents clip over an interval of lambda: boxes and costs identical,
    // target on the shared boundary reached over a dual interval.
    std::vector<AgentSpec> agents{make_agent(0, 1.0, 0.0, -1.0, 1.0), make_agent(1, 1.0, 0.0, -1.0, 1.0)};
    const ProblemInstance inst(std::move(agents), {1.0});
    const ReferenceSolution sol = solve_reference(inst, Subset::all);
    CHECK(sol.theta_star[0][0] == doctest::Approx(1.0));
    CHECK(sol.lambda_plateau);
}
