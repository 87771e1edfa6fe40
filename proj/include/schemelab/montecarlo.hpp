#pragma once

#include <cstdint>
#include <optional>

#include "schemelab/kernels.hpp"
#include "schemelab/types.hpp"

namespace schemelab {

inline constexpr std::uint64_t kDefaultDraws = 1'000'000;
inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct OutcomeCounts {
    std::uint64_t neither = 0;
    std::uint64_t period1_only = 0;
    std::uint64_t period2_only = 0;
    std::uint64_t both = 0;

    std::uint64_t total() const noexcept { return neither + period1_only + period2_only + both; }
};

struct SimulationReport {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    OutcomeCounts counts;
    std::optional<DependenceSummary> dependence;
};

struct SimulationOptions {
    unsigned threads = 1;
    bool with_dependence = false;  // uses max(n, 10^4) draws
};

// Plays out n agents: A ~ U[0,1]; the period-1 choice uses the kernel's
// conditional expectations (never the realized B); then B is drawn from
// the conditional law and the period-2 choice is made. Draw i uses the
// stream keyed by (seed, i), so results do not depend on `threads`.
SimulationReport simulate(const CostKernel& kernel, const RewardRule& rule, std::uint64_t n,
                          std::uint64_t seed, const SimulationOptions& options = {});

struct AnalyticComparison {
    double analytic = 0.0;
    SimulationReport mc;
    double z_score = 0.0;
};

// evaluate_scheme against simulate; z = (estimate - analytic) / stderr.
AnalyticComparison compare_to_analytic(const CostKernel& kernel, const RewardRule& rule,
                                       std::uint64_t n = kDefaultDraws, std::uint64_t seed = kDefaultSeed,
                                       unsigned threads = 1);

struct EmpiricalMarginals {
    double ks_a = 0.0;  // sup_t |F_n(t) - t| for period-1 costs
    double ks_b = 0.0;  // same for period-2 costs
    std::uint64_t n = 0;
};

EmpiricalMarginals empirical_marginal_deviation(const CostKernel& kernel, std::uint64_t n, std::uint64_t seed);

// 1.5 * 1.63 / sqrt(n): the acceptance band for empirical_marginal_deviation.
double ks_band(std::uint64_t n) noexcept;

}  // namespace schemelab
