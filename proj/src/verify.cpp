#include "schemelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "schemelab/analytic.hpp"
#include "schemelab/errors.hpp"
#include "schemelab/kernels.hpp"
#include "schemelab/model.hpp"
#include "schemelab/montecarlo.hpp"
#include "schemelab/optimizer.hpp"

namespace schemelab::verify {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct GridBest {
    double performance = -1.0;
    double y = 0.0;
    double z = 0.0;
};

// Exhaustive search over (y, z) on an (n+1) x (n+1) grid of [0, w]^2 with
// x = w - z. First strict maximum wins.
GridBest brute_force_iid(double w, int n) {
    GridBest best;
    for (int j = 0; j <= n; ++j) {
        const double z = w * j / n;
        for (int i = 0; i <= n; ++i) {
            const double y = w * i / n;
            const double p = performance_iid(RewardRule::full_budget(w, y, z)).performance;
            if (p > best.performance) best = {p, y, z};
        }
    }
    return best;
}

double finite_difference(const std::function<double(double)>& f, double t, double h) {
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace

std::optional<Suite> parse_suite(std::string_view name) noexcept {
    if (name == "all") return Suite::All;
    if (name == "iid") return Suite::Iid;
    if (name == "fgm") return Suite::Fgm;
    if (name == "schemes") return Suite::Schemes;
    return std::nullopt;
}

CheckResult closed_form_vs_grid(const Options&) {
    CheckResult r{"closed-form-grid", "closed-form optimal rule vs 201x201 brute force", true, {}};
    std::ostringstream detail;
    for (double w : {0.2, 0.5, 0.8, 1.0, 1.2, 1.45}) {
        const auto optimum = optimal_rule_iid(w);
        const double closed = performance_iid(optimum.rules.front()).performance;
        const auto grid = brute_force_iid(w, 200);
        const double cell = w / 200.0 * (1.0 + 1e-9);

        bool near = false;
        for (const auto& rule : optimum.rules) {
            if (optimum.z_equivalence_class) {
                near = near || (grid.z >= 1.0 - cell && std::abs(grid.y - rule.y) <= cell);
            } else {
                near = near || (std::abs(grid.y - rule.y) <= cell && std::abs(grid.z - rule.z) <= cell);
            }
        }
        const bool value_ok = std::abs(grid.performance - closed) <= 1e-3;
        const bool dominates = grid.performance <= closed + 1e-9;
        r.passed = r.passed && near && value_ok && dominates;
        detail << "w=" << w << ": closed=" << num(closed) << " grid=" << num(grid.performance) << " at (y=" << num(grid.y)
               << ", z=" << num(grid.z) << ")";
        if (!value_ok) detail << " FAIL value gap " << num(grid.performance - closed);
        if (!dominates) detail << " FAIL grid beats closed form by " << num(grid.performance - closed);
        if (!near) {
            detail << " FAIL argmax " << num(std::abs(grid.y - optimum.rules.front().y) / (w / 200.0))
                   << " cells from closed-form y=" << num(optimum.rules.front().y);
        }
        detail << "; ";
    }
    r.detail = detail.str();
    return r;
}

CheckResult dual_optimum_at_unit_budget(const Options&) {
    CheckResult r{"dual-optimum", "both optima at w = 1 reach the brute-force maximum", false, {}};
    const double first = performance_iid({2.0 / 3.0, 1.0, 1.0 / 3.0, Budget(1.0)}).performance;
    const double second = performance_iid({0.0, 1.0 / 3.0, 1.0, Budget(1.0)}).performance;
    const auto grid = brute_force_iid(1.0, 600);
    const bool equal = std::abs(first - second) <= 1e-9;
    const bool matches_grid = grid.performance <= first + 1e-9 && first - grid.performance <= 1e-5;
    const bool expected = std::abs(first - 29.0 / 27.0) <= 1e-9;
    r.passed = equal && matches_grid && expected;
    r.detail = "perf(2/3,1,1/3)=" + num(first) + " perf(0,1/3,1)=" + num(second) + " grid601=" + num(grid.performance) +
               " 29/27=" + num(29.0 / 27.0);
    return r;
}

CheckResult derivative_identity(const Options& opt) {
    CheckResult r{"derivative-identity", "dobj/dy + dobj/dz = (z - y)^2 by finite differences", true, {}};
    std::mt19937_64 gen(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr double h = 1e-5;
    constexpr double margin = 1e-3;
    double worst = 0.0;
    int accepted = 0;
    while (accepted < 100) {
        const double w = 0.05 + 0.95 * unit(gen);
        const double y = margin + (w - 2 * margin) * unit(gen);
        const double z = margin + (w - 2 * margin) * unit(gen);
        const double threshold = ((w - z) * 2.0 - y * y + z * z) / 2.0;
        if (threshold < margin || threshold > 1.0 - margin) continue;
        auto obj = [w](double yy, double zz) {
            return performance_iid(RewardRule::full_budget(w, yy, zz)).performance;
        };
        const double dy = finite_difference([&](double t) { return obj(t, z); }, y, h);
        const double dz = finite_difference([&](double t) { return obj(y, t); }, z, h);
        const double err = std::abs(dy + dz - (z - y) * (z - y));
        const auto partials = objective_partials(w - z, y, z);
        const double analytic_err = std::max(std::abs(partials.dy - dy), std::abs(partials.dz - dz));
        worst = std::max({worst, err, analytic_err});
        ++accepted;
    }
    r.passed = worst <= 1e-6;
    r.detail = "100 points, worst deviation " + num(worst) + " (tolerance 1e-6)";
    return r;
}

CheckResult fgm_monotonicity(const Options&) {
    CheckResult r{"fgm-monotonicity", "sufficient rule falls and sustained rule rises/falls in theta", true, {}};
    std::ostringstream detail;
    std::vector<double> thetas;
    for (int k = 0; k <= 20; ++k) thetas.push_back(-1.0 + 0.1 * k);

    auto steps = [&](auto&& perf) {
        std::vector<double> d;
        for (std::size_t k = 0; k + 1 < thetas.size(); ++k) d.push_back(perf(thetas[k + 1]) - perf(thetas[k]));
        return d;
    };
    for (double w : {0.3, 0.5, 0.7, 0.9, 1.2}) {
        const auto d = steps([w](double t) { return fgm_sufficient_performance(w, FgmParameter(t)).performance; });
        const bool strict = w < 1.0;
        const bool ok = std::all_of(d.begin(), d.end(), [&](double v) { return strict ? v < 0.0 : v <= 1e-12; });
        r.passed = r.passed && ok;
        detail << "sufficient w=" << w << (ok ? " ok" : " FAIL") << "; ";
    }
    for (double w : {0.5, 0.8, 1.1, 1.3}) {
        const auto d = steps([w](double t) { return fgm_sustained_performance(w, FgmParameter(t)).performance; });
        const bool rising = w < 1.0;
        const bool ok = std::all_of(d.begin(), d.end(), [&](double v) { return rising ? v > 0.0 : v < 0.0; });
        r.passed = r.passed && ok;
        detail << "sustained w=" << w << (ok ? " ok" : " FAIL") << "; ";
    }
    r.detail = detail.str();
    return r;
}

CheckResult fgm_joint_optimum_shape(const Options& opt) {
    CheckResult r{"fgm-theta-shape", "theta* = -1 outside (0.86, 1), interior inside, theta = 0 nearly optimal", true,
                  {}};
    SearchConfig config;
    config.threads = opt.threads;
    std::ostringstream detail;

    std::vector<double> extremes;
    for (int k = 1; k <= 17; ++k) extremes.push_back(0.05 * k);
    for (int k = 20; k <= 29; ++k) extremes.push_back(0.05 * k);
    const auto outer = solve_budgets(extremes, SweepMode::Fgm, config);
    bool all_negative = true;
    for (const auto& row : outer) {
        if (std::abs(row.theta.value_or(0.0) - (-1.0)) > 1e-9) {
            all_negative = false;
            detail << "theta*(" << num(row.w) << ")=" << num(row.theta.value_or(0.0)) << " FAIL; ";
        }
    }
    detail << "theta*=-1 at " << outer.size() << " outer budgets" << (all_negative ? "" : " FAIL") << "; ";

    std::vector<double> band;
    for (int k = 87; k <= 99; ++k) band.push_back(0.01 * k);
    const auto inner = solve_budgets(band, SweepMode::Fgm, config);
    int interior = 0;
    double worst_gap = 0.0;
    for (const auto& row : inner) {
        if (const double t = row.theta.value_or(-1.0); t > -1.0 + 1e-6 && t < 1.0 - 1e-6) ++interior;
        worst_gap = std::max(worst_gap, row.performance - optimize_rule_iid(row.w, config).performance);
    }
    double outer_gap = 0.0;
    for (const auto& row : outer) {
        outer_gap = std::max(outer_gap, row.performance - optimize_rule_iid(row.w, config).performance);
    }
    const bool gap_ok = worst_gap <= 0.01;
    r.passed = all_negative && interior >= 1 && gap_ok;
    detail << interior << "/" << inner.size() << " interior theta* on (0.86, 1); max gain over theta=0 on (0.86, 1) "
           << num(worst_gap) << (gap_ok ? "" : " FAIL") << " (outside the band, where theta*=-1, up to "
           << num(outer_gap) << ")";
    r.detail = detail.str();
    return r;
}

CheckResult constructed_schemes_attain_bound(const Options& opt) {
    CheckResult r{"constructed-schemes", "constructed kernels attain 2w (quadrature and Monte Carlo)", true, {}};
    std::ostringstream detail;
    auto check = [&](const CostKernel& kernel, const RewardRule& rule, double w) {
        const double quad = evaluate_scheme(kernel, rule).performance;
        const auto mc = simulate(kernel, rule, opt.draws, opt.seed, {opt.threads, false});
        const bool quad_ok = std::abs(quad - 2.0 * w) <= 1e-6;
        const bool mc_ok = std::abs(mc.estimate - 2.0 * w) <= 3.0 * mc.std_error;
        r.passed = r.passed && quad_ok && mc_ok;
        detail << kernel.description() << ": quad=" << num(quad) << " mc=" << num(mc.estimate) << "+-" << num(mc.std_error)
               << ((quad_ok && mc_ok) ? "" : " FAIL") << "; ";
    };
    for (double w : {0.25, 0.4, 0.5}) {
        check(make_purely_sufficient_kernel(Budget(w)), {w, w, 0.0, Budget(w)}, w);
    }
    for (double w : {0.3, 0.9, 1.0}) {
        check(make_purely_sustained_kernel(Budget(w)), {0.0, 0.0, w, Budget(w)}, w);
    }
    bool rejected = true;
    for (double w : {0.51, 0.6, 0.9}) {
        try {
            (void)make_purely_sufficient_kernel(Budget(w));
            rejected = false;
        } catch (const InfeasibleError&) {
        }
    }
    r.passed = r.passed && rejected;
    detail << "sufficient constructor rejects w > 1/2: " << (rejected ? "yes" : "NO");
    r.detail = detail.str();
    return r;
}

CheckResult sustained_dependence(const Options& opt) {
    CheckResult r{"sustained-dependence", "conditional correlation -1 and covariance -w^2/12 below w", true, {}};
    std::ostringstream detail;
    for (double w : {0.5, 0.9}) {
        const auto dep = dependence_summary(make_purely_sustained_kernel(Budget(w)), opt.draws, opt.seed);
        const double target = -w * w / 12.0;
        const bool rho_ok = std::abs(dep.pearson_conditional_below_w + 1.0) <= 0.01;
        const bool cov_ok = std::abs(dep.covariance_conditional_below_w - target) <= 3.0 * dep.covariance_stderr;
        r.passed = r.passed && rho_ok && cov_ok;
        detail << "w=" << w << ": rho=" << num(dep.pearson_conditional_below_w) << " cov=" << num(dep.covariance_conditional_below_w)
               << "+-" << num(dep.covariance_stderr) << " vs " << num(target) << ((rho_ok && cov_ok) ? "" : " FAIL") << "; ";
    }
    r.detail = detail.str();
    return r;
}

CheckResult marginal_uniformity(const Options& opt) {
    CheckResult r{"marginal-uniformity", "kernels keep uniform marginals (quadrature and empirical KS)", true, {}};
    std::vector<CostKernel> kernels{CostKernel::iid()};
    for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) kernels.push_back(CostKernel::fgm(FgmParameter(t)));
    for (double w : {0.25, 0.4, 0.5}) kernels.push_back(make_purely_sufficient_kernel(Budget(w)));
    for (double w : {0.3, 0.9, 1.0}) kernels.push_back(make_purely_sustained_kernel(Budget(w)));

    double worst_quad = 0.0;
    double worst_ks = 0.0;
    std::string failures;
    const double band = ks_band(opt.draws);
    for (const auto& k : kernels) {
        const double dev = marginal_deviation(k);
        const auto ks = empirical_marginal_deviation(k, opt.draws, opt.seed);
        worst_quad = std::max(worst_quad, dev);
        worst_ks = std::max({worst_ks, ks.ks_a, ks.ks_b});
        if (dev > 1e-6 || ks.ks_a > band || ks.ks_b > band) failures += k.description() + " ";
    }
    r.passed = failures.empty();
    r.detail = std::to_string(kernels.size()) + " kernels: worst quadrature deviation " + num(worst_quad) +
               " (<= 1e-6), worst KS " + num(worst_ks) + " (<= " + num(band) + ")" +
               (failures.empty() ? "" : "; FAIL: " + failures);
    return r;
}

CheckResult fgm_spearman(const Options& opt) {
    CheckResult r{"fgm-spearman", "FGM Spearman correlation equals theta/3", true, {}};
    std::ostringstream detail;
    for (double t : {-1.0, 0.0, 1.0}) {
        const auto dep = dependence_summary(CostKernel::fgm(FgmParameter(t)), opt.draws, opt.seed);
        const bool ok = std::abs(dep.spearman - t / 3.0) <= 0.01;
        r.passed = r.passed && ok;
        detail << "theta=" << t << ": " << num(dep.spearman) << (ok ? "" : " FAIL") << "; ";
    }
    r.detail = detail.str();
    return r;
}

CheckResult performance_bounds(const Options& opt) {
    CheckResult r{"bounds", "performance never exceeds 2 min(w, 1); z = 0 caps it at 1; w = 3/2 gives 2", true, {}};
    std::mt19937_64 gen(opt.seed + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<CostKernel> kernels{CostKernel::iid(), CostKernel::fgm(FgmParameter(-1.0)),
                                    CostKernel::fgm(FgmParameter(0.6)), make_purely_sufficient_kernel(Budget(0.4)),
                                    make_purely_sustained_kernel(Budget(0.9))};
    double worst_excess = -2.0;
    double worst_single = 0.0;
    int evaluations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const double w = 1.6 * unit(gen);
        const double z = w * unit(gen);
        const double y = w * unit(gen);
        const double x = (w - z) * (trial % 3 == 0 ? unit(gen) : 1.0);
        const RewardRule rule{x, y, z, Budget(w)};
        const RewardRule single{w * unit(gen), y, 0.0, Budget(w)};
        for (const auto& k : kernels) {
            worst_excess = std::max(worst_excess, evaluate_scheme(k, rule).performance - upper_bound(rule.w));
            worst_single = std::max(worst_single, evaluate_scheme(k, single).performance);
            evaluations += 2;
        }
        worst_excess = std::max(worst_excess, performance_iid(rule).performance - upper_bound(rule.w));
        worst_excess = std::max(worst_excess, fgm_performance(rule, FgmParameter(2.0 * unit(gen) - 1.0)).performance -
                                                  upper_bound(rule.w));
        worst_single = std::max(worst_single, performance_iid(single).performance);
        evaluations += 3;
    }
    const RewardRule full{0.0, 0.0, 1.5, Budget(1.5)};
    const double quad = evaluate_scheme(CostKernel::iid(), full).performance;
    const double closed = performance_iid(full).performance;
    const bool bound_ok = worst_excess <= 1e-6;
    const bool single_ok = worst_single <= 1.0 + 1e-6;
    const bool full_ok = quad == 2.0 && closed == 2.0;
    r.passed = bound_ok && single_ok && full_ok;
    r.detail = std::to_string(evaluations) + " evaluations: max excess over bound " + num(worst_excess) +
               ", max z=0 performance " + num(worst_single) + ", w=1.5 gives " + num(quad) + " / " + num(closed);
    return r;
}

std::vector<CheckResult> run_suite(Suite suite, const Options& opt) {
    std::vector<CheckResult> out;
    const bool all = suite == Suite::All;
    if (all || suite == Suite::Iid) {
        out.push_back(closed_form_vs_grid(opt));
        out.push_back(dual_optimum_at_unit_budget(opt));
        out.push_back(derivative_identity(opt));
        out.push_back(performance_bounds(opt));
    }
    if (all || suite == Suite::Fgm) {
        out.push_back(fgm_monotonicity(opt));
        out.push_back(fgm_joint_optimum_shape(opt));
        out.push_back(fgm_spearman(opt));
    }
    if (all || suite == Suite::Schemes) {
        out.push_back(constructed_schemes_attain_bound(opt));
        out.push_back(sustained_dependence(opt));
        out.push_back(marginal_uniformity(opt));
    }
    return out;
}

}  // namespace schemelab::verify
