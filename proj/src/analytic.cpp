#include "schemelab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "schemelab/errors.hpp"
#include "schemelab/model.hpp"

namespace schemelab {

namespace {

constexpr double kEdge = 1e-12;

double phi(double t) { return expected_surplus_uniform(std::max(t, 0.0)); }

// int_0^min(t,1) s(1 - s) ds
double tilt_integral(double t) {
    const double m = std::clamp(t, 0.0, 1.0);
    return m * m / 2.0 - m * m * m / 3.0;
}

// int_a^b (1 - 2c) dc
double tilt_mass(double a, double b) { return (b - a) - (b * b - a * a); }

void check_fgm_budget(double w) {
    if (!(w > 0.0) || !(w < 1.5)) {
        throw DomainError("FGM closed forms need 0 < w < 3/2, got w = " + std::to_string(w));
    }
}

}  // namespace

std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::PurelySufficient: return "purely-sufficient";
        case Regime::PartiallySufficient: return "partially-sufficient";
        case Regime::PartiallySustained: return "partially-sustained";
        case Regime::PurelySustained: return "purely-sustained";
    }
    return "unknown";
}

double g_fn(double w) {
    if (!(w >= kSufficientBoundary - kEdge && w <= 1.0 + kEdge)) {
        throw DomainError("g is defined on [2 - sqrt(2), 1], got w = " + std::to_string(w));
    }
    return (w + 1.0 - 2.0 * std::sqrt(w * w - 2.5 * w + 1.75)) / 3.0;
}

double h_fn(double w) {
    if (!(w >= 1.0 - kEdge && w <= kSustainedBoundary + kEdge)) {
        throw DomainError("h is defined on [1, sqrt(2)], got w = " + std::to_string(w));
    }
    return (w + 1.0 - 2.0 * std::sqrt(std::max(w * w + 0.5 * w - 1.25, 0.0))) / 3.0;
}

IidOptimum optimal_rule_iid(double w) {
    if (!(w >= 0.0)) {
        throw DomainError("budget must be non-negative, got w = " + std::to_string(w));
    }
    if (w >= 1.5) {
        throw RegimeError("w >= 3/2 is the trivial case: (0, 0, w) makes every type perform twice");
    }
    const Budget budget(w);
    IidOptimum out;
    if (std::abs(w - 1.0) <= kEdge) {
        out.rules.push_back({2.0 / 3.0, 1.0, 1.0 / 3.0, Budget(1.0)});
        out.rules.push_back({0.0, 1.0 / 3.0, 1.0, Budget(1.0)});
        return out;
    }
    if (w <= kSufficientBoundary) {
        out.rules.push_back({w, w, 0.0, budget});
    } else if (w < 1.0) {
        const double g = std::max(0.0, g_fn(w));
        out.rules.push_back({w - g, w, g, budget});
    } else if (w < kSustainedBoundary) {
        out.rules.push_back({0.0, std::max(0.0, h_fn(w)), w, budget});
        out.z_equivalence_class = true;
    } else {
        out.rules.push_back({0.0, 0.0, w, budget});
        out.z_equivalence_class = true;
    }
    return out;
}

ObjectivePartials objective_partials(double x, double y, double z) {
    if (!(y >= 0.0 && y <= 1.0) || !(z >= 0.0 && z <= 1.0)) {
        throw DomainError("objective_partials needs y, z in [0, 1]");
    }
    if (!(x >= 0.0)) {
        throw DomainError("objective_partials needs x >= 0");
    }
    const double threshold = (2.0 * x - y * y + z * z) / 2.0;
    return {1.0 - threshold - y * (1.0 + z - y), threshold - (1.0 - z) * (1.0 + z - y)};
}

Regime regime(double w) {
    if (!(w >= 0.0)) {
        throw DomainError("budget must be non-negative, got w = " + std::to_string(w));
    }
    if (w <= kSufficientBoundary) return Regime::PurelySufficient;
    if (w <= 1.0) return Regime::PartiallySufficient;
    if (w < kSustainedBoundary) return Regime::PartiallySustained;
    return Regime::PurelySustained;
}

FgmClosedForm fgm_performance(const RewardRule& rule, FgmParameter theta) {
    rule.validate();
    const double th = theta.value();
    const double tilt = tilt_integral(rule.z) - tilt_integral(rule.y);
    const double intercept = rule.x + phi(rule.z) - phi(rule.y) + th * tilt;
    const double slope = 1.0 + 2.0 * th * tilt;  // >= 2/3
    const double c = std::clamp(intercept / slope, 0.0, 1.0);

    const double fz = uniform_cdf(rule.z);
    const double fy = uniform_cdf(rule.y);
    const double again = fz * c + th * fz * (1.0 - fz) * tilt_mass(0.0, c);
    const double late = fy * (1.0 - c) + th * fy * (1.0 - fy) * tilt_mass(c, 1.0);
    return {c, c + again + late};
}

FgmClosedForm fgm_sufficient_performance(double w, FgmParameter theta) {
    check_fgm_budget(w);
    const double th = theta.value();
    if (w >= 1.0) {
        // The waiting value is linear in (1/2 - c) and meets w - c at c = 1/2;
        // every later type performs in period 2 because B <= 1 <= w.
        return {0.5, 1.0};
    }
    // Waiting value u(c) = (2w^2/3)(3/4 + (1/2 - c)(3/2 - w) theta) = a + b(1/2 - c).
    const double a = w * w / 2.0;
    const double b = (2.0 * w * w / 3.0) * (1.5 - w) * th;
    const double c = std::clamp((w - a - b / 2.0) / (1.0 - b), 0.0, 0.5);
    const double later = w * (1.0 - c) + th * w * (1.0 - w) * tilt_mass(c, 1.0);
    return {c, c + later};
}

FgmClosedForm fgm_sustained_performance(double w, FgmParameter theta) {
    check_fgm_budget(w);
    const double th = theta.value();
    if (w >= 1.0) {
        // Past 4/3 with theta near -1 the formula exceeds 1: every type performs.
        const double c = std::min(0.5 * (th + 6.0 * w - 3.0) / (th + 3.0), 1.0);
        return {c, 2.0 * c};
    }
    const double w2 = w * w;
    const double w3 = w2 * w;
    const double c = 0.5 * (3.0 * w2 + 3.0 * th * w2 - 2.0 * th * w3) / (3.0 + 3.0 * th * w2 - 2.0 * th * w3);
    const double again = w * c + th * w * (1.0 - w) * tilt_mass(0.0, c);
    return {c, c + again};
}

}  // namespace schemelab
