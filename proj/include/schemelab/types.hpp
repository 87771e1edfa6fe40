#pragma once

#include <vector>

namespace schemelab {

// Total reward budget w >= 0. Values at or above 3/2 are legal and fall in
// the trivial full-performance case.
class Budget {
public:
    Budget() = default;
    explicit Budget(double w);

    double value() const noexcept { return w_; }

    friend bool operator==(const Budget&, const Budget&) = default;

private:
    double w_ = 0.0;
};

// Dependence parameter of the FGM copula, |theta| <= 1.
class FgmParameter {
public:
    FgmParameter() = default;
    explicit FgmParameter(double theta);

    double value() const noexcept { return theta_; }

    friend bool operator==(const FgmParameter&, const FgmParameter&) = default;

private:
    double theta_ = 0.0;
};

// Slack allowed on the budget constraint x + z <= w, which is usually
// satisfied only up to rounding after x = w - z.
inline constexpr double kBudgetSlack = 1e-12;

// Reward rule (x, y, z) under budget w.
//   x: paid for performing in period 1
//   y: paid for performing in period 2 after skipping period 1
//   z: extra paid for the second performance
struct RewardRule {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    Budget w;

    bool feasible() const noexcept;

    // Throws DomainError naming the violated constraint.
    void validate() const;

    // Rule with x = w - z, the only shape that matters for optimal search.
    static RewardRule full_budget(double w, double y, double z);

    friend bool operator==(const RewardRule&, const RewardRule&) = default;
};

// Closed sub-interval [lo, hi] of [0, 1].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const noexcept { return hi - lo; }
};

enum class Period { First = 1, Second = 2 };

// Decision context. `cost` is the current period's cost; `performed1` only
// matters in period 2.
struct AgentState {
    Period period = Period::First;
    bool performed1 = false;
    double cost = 0.0;
};

struct SchemeEvaluation {
    double performance = 0.0;
    double period1_mass = 0.0;
    double period2_mass = 0.0;
    // Period-1 performers, disjoint and sorted; zero-length pieces dropped.
    std::vector<Interval> participation_set;
};

}  // namespace schemelab
