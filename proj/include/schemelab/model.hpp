#pragma once

#include "schemelab/kernels.hpp"
#include "schemelab/types.hpp"

namespace schemelab {

// Indifference band for the period-1 comparison. Differences above
// -kTieTolerance count as "perform" so exact ties survive rounding (the
// sustained construction leaves every low type exactly indifferent).
inline constexpr double kTieTolerance = 1e-12;

// Uniform CDF clamp(t, 0, 1).
double uniform_cdf(double t) noexcept;

// E[(t - B)^+] for B ~ U[0, 1]: t^2/2 on [0, 1], t - 1/2 beyond.
double expected_surplus_uniform(double t);

// Period-1 cost threshold under independent costs, x + phi(z) - phi(y).
// Not clamped; callers convert to a mass with uniform_cdf.
double period1_threshold_iid(const RewardRule& rule);

// Closed-form evaluation for independent uniform costs.
SchemeEvaluation performance_iid(const RewardRule& rule);

// True iff x - c + E[(z - B_c)^+] >= E[(y - B_c)^+]. The agent only knows the
// conditional law of B here, never its realization.
bool agent_period1_decision(const CostKernel& kernel, const RewardRule& rule, double c);

// True iff b <= z after a period-1 performance, b <= y otherwise.
bool agent_period2_decision(const RewardRule& rule, bool performed1, double b);

// Dispatches on state.period; state.cost is the current period's cost.
bool agent_decision(const CostKernel& kernel, const RewardRule& rule, const AgentState& state);

// Expected number of performances under any kernel, by breakpoint-aware
// quadrature along the period-1 cost axis. Throws NumericError if the
// quadrature misses its tolerance.
SchemeEvaluation evaluate_scheme(const CostKernel& kernel, const RewardRule& rule);

// 2 min(w, 1): each period's performing mass is at most F(w).
double upper_bound(Budget w) noexcept;

}  // namespace schemelab
