#include "dra/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dra {

namespace {

std::vector<int> subset_ids(const ProblemInstance& instance, Subset subset) {
    if (subset == Subset::honest_only) return instance.honest_ids();
    std::vector<int> ids(instance.agents.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ids;
}

}  // namespace

ReferenceSolution solve_reference(const ProblemInstance& instance, Subset subset, double tol) {
    instance.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("solve_reference: tol must be > 0");
    const std::vector<int> ids = subset_ids(instance, subset);
    const std::size_t D = instance.dim();
    const double n = static_cast<double>(ids.size());

    ReferenceSolution sol;
    sol.agent_ids = ids;
    sol.lambda_star.assign(D, 0.0);
    sol.residual.assign(D, 0.0);

    for (std::size_t d = 0; d < D; ++d) {
        // Feasibility of this subset's average constraint.
        double mean_lo = 0.0, mean_hi = 0.0, scale = 0.0;
        for (int id : ids) {
            const AgentSpec& ag = instance.agents[id];
            mean_lo += ag.box.lo[d];
            mean_hi += ag.box.hi[d];
            scale = std::max(scale, 2.0 * ag.cost.a[d] *
                                        (std::abs(ag.cost.b_shift[d]) + std::abs(ag.box.hi[d]) +
                                         std::abs(ag.box.lo[d]) + std::abs(instance.s[d])));
        }
        mean_lo /= n;
        mean_hi /= n;
        const double target = instance.s[d];
        if (target < mean_lo - 1e-12 || target > mean_hi + 1e-12)
            throw std::invalid_argument("solve_reference: infeasible at dimension " + std::to_string(d) +
                                        ": s=" + std::to_string(target) + " outside mean box range [" +
                                        std::to_string(mean_lo) + ", " + std::to_string(mean_hi) + "]");

        auto phi = [&](double lambda) {
            double acc = 0.0;
            for (int id : ids) {
                const AgentSpec& ag = instance.agents[id];
                acc += std::clamp(ag.cost.b_shift[d] - lambda / (2.0 * ag.cost.a[d]), ag.box.lo[d], ag.box.hi[d]);
            }
            return acc / n;
        };

        // Bracket [lo, hi] with phi(lo) >= target >= phi(hi); phi is nonincreasing.
        double limit = std::max(scale, 1.0);
        int doublings = 0;
        while (phi(-limit) < target || phi(limit) > target) {
            limit *= 2.0;
            if (++doublings > 60)
                throw std::runtime_error("solve_reference: bracket expansion failed at dimension " +
                                         std::to_string(d));
        }

        // The set {lambda : phi(lambda) == target} is an interval; locate both
        // endpoints and report its midpoint. A non-degenerate interval means
        // the optimal dual is not unique (all agents clipped there).
        int steps = 0;
        auto boundary = [&](auto pred) {
            double lo = -limit, hi = limit;  // pred(lo)=false, pred(hi)=true
            while (hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)) && steps < 400) {
                const double mid = 0.5 * (lo + hi);
                (pred(mid) ? hi : lo) = mid;
                ++steps;
            }
            return 0.5 * (lo + hi);
        };
        const double left = boundary([&](double x) { return phi(x) <= target; });
        const double right = boundary([&](double x) { return phi(x) < target; });
        const double lambda_d = 0.5 * (left + right);
        sol.lambda_star[d] = lambda_d;
        sol.iterations += steps;
        if (right - left > 1e-9 * std::max(1.0, std::abs(lambda_d))) sol.lambda_plateau = true;

        sol.residual[d] = std::abs(phi(lambda_d) - target);
        if (sol.residual[d] > tol)
            throw std::runtime_error("solve_reference: residual " + std::to_string(sol.residual[d]) +
                                     " above tolerance at dimension " + std::to_string(d));
    }

    sol.theta_star.reserve(ids.size());
    for (int id : ids) sol.theta_star.push_back(primal_argmin(instance.agents[id], sol.lambda_star));
    return sol;
}

KktReport check_kkt(const ProblemInstance& instance, Subset subset, const ReferenceSolution& solution, double tol) {
    const std::vector<int> ids = subset_ids(instance, subset);
    const std::size_t D = instance.dim();
    KktReport report;
    if (solution.agent_ids != ids || solution.theta_star.size() != ids.size() || solution.lambda_star.size() != D)
        throw std::invalid_argument("check_kkt: solution does not match instance/subset");

    report.feasible = true;
    for (std::size_t d = 0; d < D; ++d) {
        double mean = 0.0;
        for (const Vec& th : solution.theta_star) mean += th[d];
        mean /= static_cast<double>(ids.size());
        const double r = std::abs(mean - instance.s[d]);
        report.max_residual = std::max(report.max_residual, r);
        if (r > tol) report.feasible = false;
    }

    report.argmin_consistent = true;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const Vec expect = primal_argmin(instance.agents[ids[k]], solution.lambda_star);
        if (expect != solution.theta_star[k]) report.argmin_consistent = false;
    }

    // Dual stationarity: the subset's gradients at lambda* sum to zero.
    Vec grad_sum(D, 0.0);
    for (int id : ids) {
        const Vec g =
            dual_gradient(instance.agents[id], solution.lambda_star, instance.s, static_cast<int>(ids.size()));
        for (std::size_t d = 0; d < D; ++d) grad_sum[d] += g[d];
    }
    report.max_stationarity = 0.0;
    for (double g : grad_sum) report.max_stationarity = std::max(report.max_stationarity, std::abs(g));
    report.stationary = report.max_stationarity <= tol;
    return report;
}

}  // namespace dra
