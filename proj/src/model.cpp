#include "schemelab/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "schemelab/errors.hpp"
#include "schemelab/quadrature.hpp"

namespace schemelab {

namespace {

constexpr double kQuadratureTolerance = 1e-9;
constexpr double kBoundaryTolerance = 1e-12;
constexpr int kProbeBudget = 512;
constexpr double kSnapDistance = 1e-10;

void check_cost(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
}

}  // namespace

double uniform_cdf(double t) noexcept { return std::clamp(t, 0.0, 1.0); }

double expected_surplus_uniform(double t) {
    if (!(t >= 0.0)) {
        throw DomainError("expected_surplus_uniform needs t >= 0, got " + std::to_string(t));
    }
    return t <= 1.0 ? t * t / 2.0 : t - 0.5;
}

double period1_threshold_iid(const RewardRule& rule) {
    rule.validate();
    return rule.x + expected_surplus_uniform(rule.z) - expected_surplus_uniform(rule.y);
}

SchemeEvaluation performance_iid(const RewardRule& rule) {
    const double threshold = period1_threshold_iid(rule);
    const double p1 = uniform_cdf(threshold);
    SchemeEvaluation out;
    out.period1_mass = p1;
    out.period2_mass = p1 * uniform_cdf(rule.z) + (1.0 - p1) * uniform_cdf(rule.y);
    out.performance = out.period1_mass + out.period2_mass;
    if (p1 > 0.0) {
        out.participation_set.push_back({0.0, p1});
    }
    return out;
}

bool agent_period1_decision(const CostKernel& kernel, const RewardRule& rule, double c) {
    check_cost(c, "period-1 cost");
    const double perform = rule.x - c + kernel.expected_surplus(c, rule.z);
    const double wait = kernel.expected_surplus(c, rule.y);
    if (!std::isfinite(perform) || !std::isfinite(wait)) {
        throw KernelError("kernel " + kernel.description() + " returned a non-finite expectation");
    }
    return perform - wait >= -kTieTolerance;
}

bool agent_period2_decision(const RewardRule& rule, bool performed1, double b) {
    check_cost(b, "period-2 cost");
    return b <= (performed1 ? rule.z : rule.y);
}

bool agent_decision(const CostKernel& kernel, const RewardRule& rule, const AgentState& state) {
    if (state.period == Period::First) {
        return agent_period1_decision(kernel, rule, state.cost);
    }
    return agent_period2_decision(rule, state.performed1, state.cost);
}

SchemeEvaluation evaluate_scheme(const CostKernel& kernel, const RewardRule& rule) {
    rule.validate();
    if (rule.w.value() == 0.0) {
        return {};
    }

    const double levels[] = {rule.y, rule.z};
    std::vector<double> cuts{0.0};
    for (double c : kernel.breakpoints(levels)) cuts.push_back(c);
    cuts.push_back(1.0);

    auto performs = [&](double c) { return agent_period1_decision(kernel, rule, c); };

    // Within a kernel-smooth segment the decision changes sign at most a few
    // times; probe on a uniform sub-grid and bisect each switch.
    const auto segments = static_cast<int>(cuts.size() - 1);
    const int probes = std::max(4, kProbeBudget / segments);
    std::vector<double> pieces{0.0};
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s];
        const double hi = cuts[s + 1];
        double prev_c = lo;
        bool prev = performs(lo);
        for (int k = 1; k <= probes; ++k) {
            const double c = (k == probes) ? hi : lo + (hi - lo) * k / probes;
            const bool now = performs(c);
            if (now != prev) {
                // Switches within resolution of a cut are tie-tolerance artifacts.
                const double at = bisect_switch(performs, prev_c, c, kBoundaryTolerance);
                if (at - lo > kSnapDistance && hi - at > kSnapDistance) pieces.push_back(at);
            }
            prev = now;
            prev_c = c;
        }
        pieces.push_back(hi);
    }
    std::sort(pieces.begin(), pieces.end());
    pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());

    SchemeEvaluation out;
    double achieved = 0.0;
    bool converged = true;
    for (std::size_t s = 0; s + 1 < pieces.size(); ++s) {
        const double lo = pieces[s];
        const double hi = pieces[s + 1];
        if (!(hi > lo)) continue;
        const bool p1 = performs(0.5 * (lo + hi));
        const double level = p1 ? rule.z : rule.y;
        // Kernels may jump at a cut; endpoints take the one-sided limit from inside.
        const auto q = adaptive_simpson(
            [&](double c) { return kernel.conditional_cdf(inside(c, lo, hi), level); }, lo, hi,
            kQuadratureTolerance * (hi - lo));
        achieved += q.error;
        converged = converged && q.converged;
        out.period2_mass += q.value;
        if (p1) {
            out.period1_mass += hi - lo;
            if (!out.participation_set.empty() && out.participation_set.back().hi == lo) {
                out.participation_set.back().hi = hi;
            } else {
                out.participation_set.push_back({lo, hi});
            }
        }
    }
    if (!converged) {
        throw NumericError("evaluate_scheme: quadrature did not converge for kernel " + kernel.description(),
                           achieved);
    }
    out.performance = out.period1_mass + out.period2_mass;
    return out;
}

double upper_bound(Budget w) noexcept { return 2.0 * std::min(w.value(), 1.0); }

}  // namespace schemelab
