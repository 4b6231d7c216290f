#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dra/engine.hpp"
#include "dra/problem.hpp"

namespace dra {

enum class DeltaMode { analytic, sampled };

// Bound on the honest dual-gradient dispersion max_i ||grad g_i - mean grad||.
//   analytic: (1/H) * max over honest pairs of the largest distance between
//             points of their boxes (a valid upper bound).
//   sampled:  max over random dual points of the observed dispersion
//             (a lower estimate).
double delta_bound(const ProblemInstance& instance, DeltaMode mode, int samples = 1000, std::uint64_t seed = 0);

// Inputs for the convergence bounds and step-size conditions.
struct TheoryConstants {
    double u_f = 0.0;
    double L_f = 0.0;
    int total_agents = 0;   // J
    int honest_agents = 0;  // H
    double kappa_tilde = 0.0;  // full mixing matrix
    double kappa = 0.0;        // virtual honest matrix
    double chi_sq = 0.0;
    double rho = 0.0;
    double delta = 0.0;

    double alpha() const;        // H u_f L_f / (u_f + L_f)
    double beta() const;         // 1 / (H (u_f + L_f))
    double alpha_tilde() const;  // J u_f L_f / (u_f + L_f)
    double beta_tilde() const;   // 1 / (J (u_f + L_f))
    double sigma() const { return 1.0 - kappa_tilde; }
    double epsilon() const;      // 1 - kappa - 8 rho sqrt(H)
    bool rho_condition_ok() const { return epsilon() > 0.0; }
};

// Asymptotic dual neighborhood radius:
//   sqrt(192 delta^2 H^2 / beta^2) * sqrt(1 + 9/eps^3) * sqrt(4 rho^2 H + chi^2).
// Returns +inf when epsilon <= 0.
double theorem2_dual_radius(double delta, int honest_agents, double beta, double epsilon, double rho, double chi_sq);

// Primal radius: the dual radius with a 1/u_f prefactor and no H^2 in the
// first factor, i.e. dual_radius / (u_f * H).
double theorem2_primal_radius(double delta, double u_f, int honest_agents, double beta, double epsilon, double rho,
                              double chi_sq);

// Alternate primal radius as it falls out of the derivation chain,
// (1/u_f) sqrt(192 delta^2 / beta * (1 + 3/eps^3) * (4 rho^2 H + chi^2));
// reported side by side with the headline value.
double theorem2_primal_radius_derivation(double delta, double u_f, int honest_agents, double beta, double epsilon,
                                         double rho, double chi_sq);

enum class TheoremId { theorem1, theorem2 };

struct ConditionVerdict {
    std::string name;
    bool pass = true;
    int first_violation_k = -1;
};

struct StepSizeVerdicts {
    std::vector<ConditionVerdict> conditions;
    double k0_floor = 0.0;  // stated lower bound on the schedule offset
    bool all_pass = true;
};

// Evaluates the admissibility conditions for gamma^k over k = 0..horizon.
StepSizeVerdicts stepsize_admissible(const StepSchedule& schedule, const TheoryConstants& constants,
                                     TheoremId which, int horizon);

// Same checks for an arbitrary step-size sequence.
StepSizeVerdicts stepsize_admissible_fn(const std::function<double(int)>& gamma, int k0_or_negative,
                                        const TheoryConstants& constants, TheoremId which, int horizon);

struct TheoryReport {
    double u_f = 0.0, L_f = 0.0;
    double alpha = 0.0, beta = 0.0;
    double kappa = 0.0, kappa_tilde = 0.0, chi_sq = 0.0;
    double rho = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    bool rho_condition_ok = false;
    double dual_radius = 0.0;
    double primal_radius = 0.0;
    double primal_radius_derivation = 0.0;
    StepSizeVerdicts stepsize;
};

TheoryReport make_theory_report(const TheoryConstants& constants, const StepSchedule& schedule, int horizon);

}  // namespace dra
