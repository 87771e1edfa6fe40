#include "schemelab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "schemelab/errors.hpp"
#include "schemelab/model.hpp"

namespace schemelab {

namespace {

OutcomeCounts simulate_range(const CostKernel& kernel, const RewardRule& rule, std::uint64_t seed,
                             std::uint64_t begin, std::uint64_t end) {
    OutcomeCounts counts;
    for (std::uint64_t i = begin; i < end; ++i) {
        CounterStream stream(seed, i);
        const double a = stream.uniform();
        const bool first = agent_decision(kernel, rule, {Period::First, false, a});
        const double b = kernel.sample(a, stream);
        const bool second = agent_decision(kernel, rule, {Period::Second, first, b});
        if (first && second) {
            ++counts.both;
        } else if (first) {
            ++counts.period1_only;
        } else if (second) {
            ++counts.period2_only;
        } else {
            ++counts.neither;
        }
    }
    return counts;
}

double sup_deviation(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = std::clamp(v[i], 0.0, 1.0);
        worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - t), std::abs(t - static_cast<double>(i) / n)});
    }
    return worst;
}

}  // namespace

SimulationReport simulate(const CostKernel& kernel, const RewardRule& rule, std::uint64_t n, std::uint64_t seed,
                          const SimulationOptions& options) {
    if (n == 0) {
        throw ParameterError("simulate needs n >= 1");
    }
    rule.validate();

    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, 64));
    std::vector<OutcomeCounts> shards(workers);
    if (workers == 1) {
        shards[0] = simulate_range(kernel, rule, seed, 0, n);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            const std::uint64_t begin = n * t / workers;
            const std::uint64_t end = n * (t + 1) / workers;
            pool.emplace_back([&, t, begin, end] { shards[t] = simulate_range(kernel, rule, seed, begin, end); });
        }
        for (auto& th : pool) th.join();
    }

    SimulationReport report;
    report.n = n;
    report.seed = seed;
    for (const auto& s : shards) {
        report.counts.neither += s.neither;
        report.counts.period1_only += s.period1_only;
        report.counts.period2_only += s.period2_only;
        report.counts.both += s.both;
    }
    // Per-draw count v in {0, 1, 2}; moments from integer tallies.
    const auto& c = report.counts;
    const double dn = static_cast<double>(n);
    const double sum = static_cast<double>(c.period1_only + c.period2_only + 2 * c.both);
    const double sum_sq = static_cast<double>(c.period1_only + c.period2_only + 4 * c.both);
    report.estimate = sum / dn;
    if (n > 1) {
        const double var = std::max(sum_sq - sum * sum / dn, 0.0) / (dn - 1.0);
        report.std_error = std::sqrt(var / dn);
    }
    if (options.with_dependence) {
        report.dependence = dependence_summary(kernel, std::max<std::uint64_t>(n, 10000), seed);
    }
    return report;
}

AnalyticComparison compare_to_analytic(const CostKernel& kernel, const RewardRule& rule, std::uint64_t n,
                                       std::uint64_t seed, unsigned threads) {
    AnalyticComparison out;
    out.analytic = evaluate_scheme(kernel, rule).performance;
    out.mc = simulate(kernel, rule, n, seed, {threads, false});
    const double diff = out.mc.estimate - out.analytic;
    if (out.mc.std_error > 0.0) {
        out.z_score = diff / out.mc.std_error;
    } else if (std::abs(diff) <= 1e-12) {
        out.z_score = 0.0;
    } else {
        out.z_score = std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return out;
}

EmpiricalMarginals empirical_marginal_deviation(const CostKernel& kernel, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) {
        throw ParameterError("empirical_marginal_deviation needs n >= 1");
    }
    std::vector<double> a(n), b(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto pair = draw_pair(kernel, seed, i);
        a[i] = pair.a;
        b[i] = pair.b;
    }
    return {sup_deviation(a), sup_deviation(b), n};
}

double ks_band(std::uint64_t n) noexcept { return 1.5 * 1.63 / std::sqrt(static_cast<double>(n)); }

}  // namespace schemelab
