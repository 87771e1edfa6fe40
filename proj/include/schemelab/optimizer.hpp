#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "schemelab/types.hpp"

namespace schemelab {

struct SearchConfig {
    double coarse_step = 0.01;  // rewards
    double theta_step = 0.05;
    double refine_tolerance = 1e-6;
    int max_refine_sweeps = 50;
    unsigned threads = 1;  // sweep rows only; single optimizations are serial

    void validate() const;
};

struct OptimizationResult {
    RewardRule rule;
    std::optional<FgmParameter> theta;
    double performance = 0.0;
    std::uint64_t evaluations = 0;
    bool converged = false;
};

// Maximizes performance_iid over (y, z) in [0, w]^2 with x = w - z.
// Coarse-grid ties go to the lexicographically smallest (z, y). When the
// optimum has z >= 1 it is reported as the representative z = w, x = 0.
OptimizationResult optimize_rule_iid(double w, const SearchConfig& config = {});

// Joint search over (y, z, theta) under the FGM family, 0 <= w < 3/2.
// Ties go to the lexicographically smallest (z, y, theta).
OptimizationResult optimize_fgm(double w, const SearchConfig& config = {});

// Search over (y, z) under FGM with theta held fixed.
OptimizationResult optimize_fgm_fixed_theta(double w, FgmParameter theta, const SearchConfig& config = {});

enum class SweepMode { Iid, Fgm, FgmThetaZero };

std::string_view to_string(SweepMode mode) noexcept;
std::optional<SweepMode> parse_sweep_mode(std::string_view name) noexcept;

struct SweepRow {
    double w = 0.0;
    RewardRule rule;
    std::optional<double> theta;  // absent in iid mode
    double performance = 0.0;
};

// One row per budget, in the given order, solved on config.threads workers.
std::vector<SweepRow> solve_budgets(std::span<const double> budgets, SweepMode mode, const SearchConfig& config = {});

// Rows at w_min + k * step for every such w strictly below w_max, in
// increasing w. Rows are computed on config.threads workers.
std::vector<SweepRow> sweep(double w_min, double w_max, double step, SweepMode mode,
                            const SearchConfig& config = {});

}  // namespace schemelab
