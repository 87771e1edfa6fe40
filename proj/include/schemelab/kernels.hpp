#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "schemelab/rng.hpp"
#include "schemelab/types.hpp"

namespace schemelab {

// ---------------------------------------------------------------------------
// FGM copula G(a, b) = ab(1 + theta(1 - a)(1 - b)) and its conditional views.
// ---------------------------------------------------------------------------

double fgm_cdf(double a, double b, FgmParameter theta);

// P(B <= b | A = c) = b + theta(1 - 2c) b(1 - b).
double fgm_conditional_cdf(double c, double b, FgmParameter theta);

// Inverse of fgm_conditional_cdf in b.
double fgm_conditional_quantile(double c, double u, FgmParameter theta);

// E[B | A = c] = 1/2 + (2c - 1) theta / 6.
double fgm_conditional_mean(double c, FgmParameter theta);

// ---------------------------------------------------------------------------
// Kernel alternatives. Each one is the conditional law of B given A = c.
// ---------------------------------------------------------------------------

struct IidKernel {};

struct FgmKernel {
    FgmParameter theta;
};

// Types at most w draw B uniformly above w; types above w draw B below w
// with probability w / (1 - w).
struct PurelySufficientKernel {
    double w = 0.0;
    double mix = 0.0;
};

// Types at most w have B = w - c exactly; types above w draw B uniformly
// on (w, 1].
struct PurelySustainedKernel {
    double w = 0.0;
};

// N x N piecewise-constant joint density, balanced to uniform marginals.
class GridDensityKernel {
public:
    // `masses` is a square non-negative matrix of cell weights (row index =
    // period-1 cell). Total mass is normalized to 1 and rows/columns are
    // rebalanced to 1/N each. Throws KernelError if that is impossible.
    explicit GridDensityKernel(std::vector<std::vector<double>> masses);

    static GridDensityKernel load_csv(const std::string& path);

    std::size_t size() const noexcept { return n_; }

    // Joint mass of cell (i, j) after balancing.
    double mass(std::size_t i, std::size_t j) const { return joint_[i * n_ + j]; }

    double conditional_cdf(double c, double t) const;
    double expected_surplus(double c, double t) const;
    double sample(double c, CounterStream& stream) const;

private:
    std::size_t row_of(double c) const noexcept;

    std::size_t n_ = 0;
    std::vector<double> joint_;        // n x n, sums to 1
    std::vector<double> conditional_;  // n x n, each row sums to 1
    std::vector<double> cumulative_;   // n x (n + 1) row-wise prefix sums
};

enum class KernelKind { Iid, Fgm, PurelySufficient, PurelySustained, GridDensity };

// Joint law of (A, B) on [0, 1]^2 with uniform marginals. Immutable, so it
// is safe to share between threads; sampling takes the caller's stream.
class CostKernel {
public:
    using Law = std::variant<IidKernel, FgmKernel, PurelySufficientKernel, PurelySustainedKernel,
                             GridDensityKernel>;

    static CostKernel iid();
    static CostKernel fgm(FgmParameter theta);
    static CostKernel grid_density(GridDensityKernel grid);

    KernelKind kind() const noexcept;
    const Law& law() const noexcept { return law_; }

    // G_c(t) = P(B <= t | A = c); right-continuous in t.
    double conditional_cdf(double c, double t) const;

    // E[(t - B)^+ | A = c], exact for atoms.
    double expected_surplus(double c, double t) const;

    // Draws B given A = c.
    double sample(double c, CounterStream& stream) const;

    // Budget the kernel was built for, if any.
    std::optional<double> budget() const noexcept;

    // Points in (0, 1) where, as a function of c, the conditional law or
    // G_c(t) at one of the given levels may jump.
    std::vector<double> breakpoints(std::span<const double> levels) const;

    std::string description() const;

private:
    explicit CostKernel(Law law) : law_(std::move(law)) {}

    friend CostKernel make_purely_sufficient_kernel(Budget w);
    friend CostKernel make_purely_sustained_kernel(Budget w);

    Law law_;
};

// The sustained kernel puts an atom at w - c; t within this slack of the
// atom counts as reaching it.
inline constexpr double kAtomSlack = 1e-12;

// Requires 0 < w <= 1/2 (InfeasibleError otherwise).
CostKernel make_purely_sufficient_kernel(Budget w);

// Requires 0 < w <= 1 (ParameterError otherwise).
CostKernel make_purely_sustained_kernel(Budget w);

// Parses a selector such as "iid", "fgm" (with theta), "sufficient",
// "sustained" or "grid" (with a CSV path).
CostKernel make_kernel(const std::string& name, std::optional<double> w,
                       std::optional<double> theta, const std::string& grid_path = {});

// sup over t in {0, 0.001, ..., 1} of |int_0^1 G_c(t) dc - t|.
double marginal_deviation(const CostKernel& kernel);

// Draws (A, B) for draw `index` of the run keyed by `seed`.
struct CostPair {
    double a;
    double b;
};
CostPair draw_pair(const CostKernel& kernel, std::uint64_t seed, std::uint64_t index);

struct DependenceSummary {
    double spearman = 0.0;
    // Restricted to samples with A <= w (w from the kernel, else 1).
    double pearson_conditional_below_w = 0.0;
    double covariance_conditional_below_w = 0.0;
    double covariance_stderr = 0.0;
    std::uint64_t conditional_samples = 0;
    double threshold = 1.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

// Monte Carlo dependence diagnostics; n >= 10^4.
DependenceSummary dependence_summary(const CostKernel& kernel, std::uint64_t n,
                                     std::uint64_t seed);

}  // namespace schemelab
