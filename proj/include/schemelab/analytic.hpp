#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "schemelab/types.hpp"

namespace schemelab {

// Budgets where the optimal independent-cost rule changes shape:
// g(2 - sqrt 2) = 0 and h(sqrt 2) = 0.
inline const double kSufficientBoundary = 2.0 - std::sqrt(2.0);
inline const double kSustainedBoundary = std::sqrt(2.0);

enum class Regime { PurelySufficient, PartiallySufficient, PartiallySustained, PurelySustained };

std::string_view to_string(Regime r) noexcept;

// (w + 1 - 2 sqrt(w^2 - 2.5w + 1.75)) / 3 on [2 - sqrt 2, 1].
double g_fn(double w);

// (w + 1 - 2 sqrt(w^2 + 0.5w - 1.25)) / 3 on [1, sqrt 2].
double h_fn(double w);

struct IidOptimum {
    // Sorted by (z, y); two entries at w = 1, one otherwise.
    std::vector<RewardRule> rules;
    // For w > 1 the optimum is a class: (w - z, y*, z) for every z in
    // [1, w]. `rules` then holds the representative (0, y*, w).
    bool z_equivalence_class = false;
};

// Optimal rule for independent uniform costs, 0 <= w < 3/2.
IidOptimum optimal_rule_iid(double w);

struct ObjectivePartials {
    double dy = 0.0;
    double dz = 0.0;
};

// Partial derivatives of the independent-cost objective in y and z along
// x fixed, valid for y, z <= 1.
ObjectivePartials objective_partials(double x, double y, double z);

Regime regime(double w);

struct FgmClosedForm {
    double threshold = 0.0;
    double performance = 0.0;
};

// Closed-form threshold and performance for an arbitrary feasible rule
// under the FGM copula. The period-1 comparison is linear in c, so the
// performers form [0, threshold].
FgmClosedForm fgm_performance(const RewardRule& rule, FgmParameter theta);

// Rule (w, w, 0) under FGM(theta), 0 < w < 3/2.
FgmClosedForm fgm_sufficient_performance(double w, FgmParameter theta);

// Rule (0, 0, w) under FGM(theta), 0 < w < 3/2.
FgmClosedForm fgm_sustained_performance(double w, FgmParameter theta);

}  // namespace schemelab
