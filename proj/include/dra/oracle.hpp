#pragma once

#include <vector>

#include "dra/problem.hpp"

namespace dra {

enum class Subset { all, honest_only };

struct ReferenceSolution {
    std::vector<int> agent_ids;          // agents the solution covers, ascending
    std::vector<Vec> theta_star;         // aligned with agent_ids
    Vec lambda_star;
    Vec residual;                        // per dimension |mean(theta*) - s|
    int iterations = 0;                  // bisection steps summed over dimensions
    bool lambda_plateau = false;         // optimal dual is an interval; midpoint reported
};

// Exact primal-dual reference for the average-equality problem over the
// chosen subset. Per dimension, the mean allocation phi(lambda) is continuous
// and nonincreasing, so lambda* is found by bracketed bisection; theta* is
// the per-agent argmin at lambda*. Throws when the subset's boxes cannot
// attain s on average or when bracket expansion fails.
ReferenceSolution solve_reference(const ProblemInstance& instance, Subset subset, double tol = 1e-10);

struct KktReport {
    bool feasible = false;            // |mean(theta*) - s| <= tol per dimension
    bool argmin_consistent = false;   // theta*_i == primal_argmin(i, lambda*) exactly
    bool stationary = false;          // sum_i grad g_i(lambda*) == 0 within tol
    double max_residual = 0.0;
    double max_stationarity = 0.0;

    bool pass() const { return feasible && argmin_consistent && stationary; }
};

KktReport check_kkt(const ProblemInstance& instance, Subset subset, const ReferenceSolution& solution, double tol);

}  // namespace dra
