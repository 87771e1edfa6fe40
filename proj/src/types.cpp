#include "schemelab/types.hpp"

#include <cmath>
#include <string>

#include "schemelab/errors.hpp"

namespace schemelab {

Budget::Budget(double w) : w_(w) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
        throw DomainError("budget must be a finite non-negative number, got " + std::to_string(w));
    }
}

FgmParameter::FgmParameter(double theta) : theta_(theta) {
    if (!(std::abs(theta) <= 1.0)) {
        throw DomainError("FGM parameter must lie in [-1, 1], got " + std::to_string(theta));
    }
}

bool RewardRule::feasible() const noexcept {
    const double budget = w.value();
    return x >= 0.0 && y >= 0.0 && z >= 0.0 && y <= budget + kBudgetSlack &&
           x + z <= budget + kBudgetSlack;
}

void RewardRule::validate() const {
    const double budget = w.value();
    if (!(x >= 0.0) || !(y >= 0.0) || !(z >= 0.0)) {
        throw DomainError("reward rule components must be non-negative");
    }
    if (y > budget + kBudgetSlack) {
        throw DomainError("reward rule violates y <= w");
    }
    if (x + z > budget + kBudgetSlack) {
        throw DomainError("reward rule violates x + z <= w");
    }
}

RewardRule RewardRule::full_budget(double w, double y, double z) {
    return RewardRule{std::max(0.0, w - z), y, z, Budget(w)};
}

}  // namespace schemelab
