#include "schemelab/optimizer.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "schemelab/analytic.hpp"
#include "schemelab/errors.hpp"
#include "schemelab/model.hpp"

namespace schemelab {

namespace {

// Strict-improvement margin; keeps coarse-grid ties on the first
// (lexicographically smallest) point and stops refinement from wandering
// along flat directions.
constexpr double kImprovement = 1e-12;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

// Coordinates are ordered (z, y, theta) so nested ascending loops visit
// points in the tie-break order.
constexpr std::size_t kMaxDims = 3;
using Point = std::array<double, kMaxDims>;

struct Box {
    std::size_t dims = 0;
    Point lo{};
    Point hi{};
    Point step{};
};

class Search {
public:
    Search(Box box, std::function<double(const Point&)> objective, const SearchConfig& config)
        : box_(box), objective_(std::move(objective)), config_(config) {}

    void run() {
        coarse();
        refine();
    }

    const Point& best() const { return best_; }
    double value() const { return value_; }
    std::uint64_t evaluations() const { return evaluations_; }
    bool converged() const { return converged_; }

private:
    double eval(const Point& p) {
        ++evaluations_;
        return objective_(p);
    }

    std::vector<double> axis(std::size_t d) const {
        std::vector<double> pts;
        const double span = box_.hi[d] - box_.lo[d];
        if (span <= 0.0) {
            return {box_.lo[d]};
        }
        const auto count = static_cast<long>(std::ceil(span / box_.step[d] - 1e-9));
        for (long k = 0; k < count; ++k) {
            pts.push_back(box_.lo[d] + static_cast<double>(k) * box_.step[d]);
        }
        pts.push_back(box_.hi[d]);
        return pts;
    }

    void coarse() {
        std::array<std::vector<double>, kMaxDims> axes;
        for (std::size_t d = 0; d < kMaxDims; ++d) {
            axes[d] = d < box_.dims ? axis(d) : std::vector<double>{0.0};
        }
        value_ = -std::numeric_limits<double>::infinity();
        Point p{};
        for (double a : axes[0]) {
            p[0] = a;
            for (double b : axes[1]) {
                p[1] = b;
                for (double c : axes[2]) {
                    p[2] = c;
                    const double v = eval(p);
                    if (v > value_ + kImprovement) {
                        value_ = v;
                        best_ = p;
                    }
                }
            }
        }
    }

    // Golden-section maximization of one coordinate on [lo, hi]; the bracket
    // endpoints are candidates too so optima on the box boundary are exact.
    std::pair<double, double> line_search(Point p, std::size_t d, double lo, double hi) {
        auto at = [&](double t) {
            p[d] = t;
            return eval(p);
        };
        double best_t = lo;
        double best_v = at(lo);
        const double v_hi = at(hi);
        if (v_hi > best_v + kImprovement) {
            best_t = hi;
            best_v = v_hi;
        }
        double a = lo, b = hi;
        double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
        double f1 = at(x1), f2 = at(x2);
        while (b - a > config_.refine_tolerance) {
            if (f1 >= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - kInvPhi * (b - a);
                f1 = at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kInvPhi * (b - a);
                f2 = at(x2);
            }
        }
        const double mid = 0.5 * (a + b);
        const double v_mid = at(mid);
        if (v_mid > best_v + kImprovement) {
            best_t = mid;
            best_v = v_mid;
        }
        return {best_t, best_v};
    }

    void refine() {
        converged_ = false;
        for (int sweep = 0; sweep < config_.max_refine_sweeps; ++sweep) {
            double moved = 0.0;
            for (std::size_t d = 0; d < box_.dims; ++d) {
                if (box_.hi[d] <= box_.lo[d]) continue;
                const double lo = std::max(box_.lo[d], best_[d] - box_.step[d]);
                const double hi = std::min(box_.hi[d], best_[d] + box_.step[d]);
                const auto [t, v] = line_search(best_, d, lo, hi);
                if (v > value_ + kImprovement) {
                    moved = std::max(moved, std::abs(t - best_[d]));
                    best_[d] = t;
                    value_ = v;
                }
            }
            if (moved <= config_.refine_tolerance) {
                converged_ = true;
                return;
            }
        }
    }

    Box box_;
    std::function<double(const Point&)> objective_;
    const SearchConfig& config_;
    Point best_{};
    double value_ = 0.0;
    std::uint64_t evaluations_ = 0;
    bool converged_ = false;
};

void check_budget(double w) {
    if (!(w >= 0.0) || !(w < 1.5)) {
        throw DomainError("optimizer needs 0 <= w < 3/2, got w = " + std::to_string(w));
    }
}

// Once z >= 1 the second performance is certain, so only x + z = w matters;
// report the representative z = w.
RewardRule canonical_rule(double w, double y, double z) {
    if (z >= 1.0 - 1e-9 && w >= 1.0) {
        z = w;
    }
    return RewardRule::full_budget(w, y, z);
}

OptimizationResult finish(Search& search, double w, bool with_theta,
                          const std::function<double(const RewardRule&, double)>& evaluate,
                          std::optional<double> fixed_theta = std::nullopt) {
    search.run();
    const Point& p = search.best();
    OptimizationResult out;
    out.rule = canonical_rule(w, p[1], p[0]);
    const double theta = with_theta ? p[2] : fixed_theta.value_or(0.0);
    if (with_theta || fixed_theta) {
        out.theta = FgmParameter(std::clamp(theta, -1.0, 1.0));
    }
    out.performance = evaluate(out.rule, theta);
    out.evaluations = search.evaluations() + 1;
    out.converged = search.converged();
    return out;
}

double iid_value(const RewardRule& rule, double) { return performance_iid(rule).performance; }

double fgm_value(const RewardRule& rule, double theta) {
    return fgm_performance(rule, FgmParameter(theta)).performance;
}

}  // namespace

void SearchConfig::validate() const {
    if (!(coarse_step > 0.0) || !(theta_step > 0.0)) {
        throw ParameterError("search steps must be positive");
    }
    if (!(refine_tolerance > 0.0)) {
        throw ParameterError("refine tolerance must be positive");
    }
    if (max_refine_sweeps < 0) {
        throw ParameterError("max refine sweeps must be non-negative");
    }
}

OptimizationResult optimize_rule_iid(double w, const SearchConfig& config) {
    check_budget(w);
    config.validate();
    Box box{2, {0.0, 0.0, 0.0}, {w, w, 0.0}, {config.coarse_step, config.coarse_step, 1.0}};
    Search search(box, [w](const Point& p) { return iid_value(RewardRule::full_budget(w, p[1], p[0]), 0.0); },
                  config);
    return finish(search, w, false, iid_value);
}

OptimizationResult optimize_fgm(double w, const SearchConfig& config) {
    check_budget(w);
    config.validate();
    Box box{3, {0.0, 0.0, -1.0}, {w, w, 1.0}, {config.coarse_step, config.coarse_step, config.theta_step}};
    Search search(
        box, [w](const Point& p) { return fgm_value(RewardRule::full_budget(w, p[1], p[0]), p[2]); }, config);
    return finish(search, w, true, fgm_value);
}

OptimizationResult optimize_fgm_fixed_theta(double w, FgmParameter theta, const SearchConfig& config) {
    check_budget(w);
    config.validate();
    const double th = theta.value();
    Box box{2, {0.0, 0.0, 0.0}, {w, w, 0.0}, {config.coarse_step, config.coarse_step, 1.0}};
    Search search(
        box, [w, th](const Point& p) { return fgm_value(RewardRule::full_budget(w, p[1], p[0]), th); }, config);
    return finish(search, w, false, fgm_value, th);
}

std::string_view to_string(SweepMode mode) noexcept {
    switch (mode) {
        case SweepMode::Iid: return "iid";
        case SweepMode::Fgm: return "fgm";
        case SweepMode::FgmThetaZero: return "fgm_theta_zero";
    }
    return "unknown";
}

std::optional<SweepMode> parse_sweep_mode(std::string_view name) noexcept {
    if (name == "iid") return SweepMode::Iid;
    if (name == "fgm") return SweepMode::Fgm;
    if (name == "fgm_theta_zero") return SweepMode::FgmThetaZero;
    return std::nullopt;
}

std::vector<SweepRow> sweep(double w_min, double w_max, double step, SweepMode mode, const SearchConfig& config) {
    if (!(step > 0.0)) {
        throw ParameterError("sweep step must be positive");
    }
    if (!(w_min >= 0.0) || !(w_min < w_max) || !(w_max < 1.5)) {
        throw ParameterError("sweep needs 0 <= w_min < w_max < 3/2");
    }
    config.validate();

    std::vector<double> budgets;
    for (long k = 0;; ++k) {
        const double w = w_min + static_cast<double>(k) * step;
        if (w >= w_max - 1e-9 * step) break;
        budgets.push_back(w);
    }

    return solve_budgets(budgets, mode, config);
}

std::vector<SweepRow> solve_budgets(std::span<const double> budgets, SweepMode mode, const SearchConfig& config) {
    config.validate();
    std::vector<SweepRow> rows(budgets.size());
    auto solve = [&](std::size_t i) {
        const double w = budgets[i];
        OptimizationResult r;
        switch (mode) {
            case SweepMode::Iid: r = optimize_rule_iid(w, config); break;
            case SweepMode::Fgm: r = optimize_fgm(w, config); break;
            case SweepMode::FgmThetaZero: r = optimize_fgm_fixed_theta(w, FgmParameter(0.0), config); break;
        }
        SweepRow row{w, r.rule, std::nullopt, r.performance};
        if (r.theta) row.theta = r.theta->value();
        rows[i] = row;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(rows.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) solve(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < rows.size(); i = next++) {
                try {
                    solve(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

}  // namespace schemelab
