#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace schemelab::verify {

enum class Suite { All, Iid, Fgm, Schemes };

std::optional<Suite> parse_suite(std::string_view name) noexcept;

struct Options {
    std::uint64_t draws = 1'000'000;
    std::uint64_t seed = 20240917;
    unsigned threads = 1;
};

struct CheckResult {
    std::string id;
    std::string title;
    bool passed = false;
    std::string detail;
};

// Each check is one end-to-end property with its tolerance fixed here.
CheckResult closed_form_vs_grid(const Options& opt);
CheckResult dual_optimum_at_unit_budget(const Options& opt);
CheckResult derivative_identity(const Options& opt);
CheckResult fgm_monotonicity(const Options& opt);
CheckResult fgm_joint_optimum_shape(const Options& opt);
CheckResult constructed_schemes_attain_bound(const Options& opt);
CheckResult sustained_dependence(const Options& opt);
CheckResult marginal_uniformity(const Options& opt);
CheckResult fgm_spearman(const Options& opt);
CheckResult performance_bounds(const Options& opt);

std::vector<CheckResult> run_suite(Suite suite, const Options& opt);

}  // namespace schemelab::verify
