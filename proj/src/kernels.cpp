#include "schemelab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "schemelab/errors.hpp"
#include "schemelab/quadrature.hpp"

namespace schemelab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clamp01(double t) { return std::clamp(t, 0.0, 1.0); }

void require_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
}

// Uniform law on (lo, hi].
double uniform_cdf(double t, double lo, double hi) { return std::clamp((t - lo) / (hi - lo), 0.0, 1.0); }

double uniform_surplus(double t, double lo, double hi) {
    if (t <= lo) {
        return 0.0;
    }
    if (t >= hi) {
        return t - 0.5 * (lo + hi);
    }
    return (t - lo) * (t - lo) / (2.0 * (hi - lo));
}

double draw_upper(double w, CounterStream& stream) { return w + (1.0 - w) * (1.0 - stream.uniform()); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Dependence term of the FGM conditional law: int_0^m s(1 - s) ds.
double fgm_tilt_integral(double m) { return m * m / 2.0 - m * m * m / 3.0; }

double fgm_surplus(double c, double t, double theta) {
    if (t <= 0.0) {
        return 0.0;
    }
    const double m = std::min(t, 1.0);
    const double tilt = theta * (1.0 - 2.0 * c);
    return m * m / 2.0 + tilt * fgm_tilt_integral(m) + std::max(t - 1.0, 0.0);
}

double fgm_conditional_cdf_raw(double c, double b, double theta) {
    const double t = clamp01(b);
    return t + theta * (1.0 - 2.0 * c) * t * (1.0 - t);
}

double fgm_quantile_raw(double c, double u, double theta) {
    if (u <= 0.0) {
        return 0.0;
    }
    const double tilt = theta * (1.0 - 2.0 * c);
    if (std::abs(tilt) < 1e-15) {
        return u;
    }
    // Smaller root of tilt*b^2 - (1 + tilt) b + u = 0, in cancellation-free form.
    const double p = 1.0 + tilt;
    const double disc = std::max(p * p - 4.0 * tilt * u, 0.0);
    return std::clamp(2.0 * u / (p + std::sqrt(disc)), 0.0, 1.0);
}

}  // namespace

// ----------------------------------------------------------------- FGM ----

double fgm_cdf(double a, double b, FgmParameter theta) {
    require_unit(a, "a");
    require_unit(b, "b");
    return a * b * (1.0 + theta.value() * (1.0 - a) * (1.0 - b));
}

double fgm_conditional_cdf(double c, double b, FgmParameter theta) {
    require_unit(c, "c");
    require_unit(b, "b");
    return fgm_conditional_cdf_raw(c, b, theta.value());
}

double fgm_conditional_quantile(double c, double u, FgmParameter theta) {
    require_unit(c, "c");
    require_unit(u, "u");
    return fgm_quantile_raw(c, u, theta.value());
}

double fgm_conditional_mean(double c, FgmParameter theta) {
    require_unit(c, "c");
    return 0.5 + (2.0 * c - 1.0) * theta.value() / 6.0;
}

// -------------------------------------------------------- GridDensity ----

GridDensityKernel::GridDensityKernel(std::vector<std::vector<double>> masses) : n_(masses.size()) {
    if (n_ == 0) {
        throw KernelError("grid density matrix is empty");
    }
    joint_.assign(n_ * n_, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (masses[i].size() != n_) {
            throw KernelError("grid density matrix must be square: row " + std::to_string(i + 1) +
                              " has " + std::to_string(masses[i].size()) + " columns, expected " +
                              std::to_string(n_));
        }
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = masses[i][j];
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw KernelError("grid density entries must be finite and non-negative");
            }
            joint_[i * n_ + j] = v;
            total += v;
        }
    }
    if (!(total > 0.0)) {
        throw KernelError("grid density has zero total mass");
    }
    for (double& v : joint_) {
        v /= total;
    }

    // Sinkhorn balancing towards row and column masses 1/N.
    const double target = 1.0 / static_cast<double>(n_);
    std::vector<double> sums(n_);
    double worst = 1.0;
    for (int iter = 0; iter < 20000 && worst > 1e-13; ++iter) {
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += joint_[i * n_ + j];
            if (s <= 0.0) throw KernelError("grid density row " + std::to_string(i + 1) + " has no mass");
            for (std::size_t j = 0; j < n_; ++j) joint_[i * n_ + j] *= target / s;
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) sums[j] += joint_[i * n_ + j];
        for (std::size_t j = 0; j < n_; ++j) {
            if (sums[j] <= 0.0) throw KernelError("grid density column " + std::to_string(j + 1) + " has no mass");
        }
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) joint_[i * n_ + j] *= target / sums[j];
        worst = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += joint_[i * n_ + j];
            worst = std::max(worst, std::abs(s - target));
        }
    }

    // Cumulative marginal deviation of B at cell edges.
    double cum_b = 0.0;
    double deviation = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < n_; ++i) col += joint_[i * n_ + j];
        cum_b += col;
        deviation = std::max(deviation, std::abs(cum_b - static_cast<double>(j + 1) * target));
    }
    double cum_a = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) row += joint_[i * n_ + j];
        cum_a += row;
        deviation = std::max(deviation, std::abs(cum_a - static_cast<double>(i + 1) * target));
    }
    if (deviation > 1e-3) {
        throw KernelError("grid density cannot be balanced to uniform marginals (deviation " + fmt(deviation) + ")");
    }

    conditional_.assign(n_ * n_, 0.0);
    cumulative_.assign(n_ * (n_ + 1), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) row += joint_[i * n_ + j];
        double acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            conditional_[i * n_ + j] = joint_[i * n_ + j] / row;
            acc += conditional_[i * n_ + j];
            cumulative_[i * (n_ + 1) + j + 1] = acc;
        }
    }
}

GridDensityKernel GridDensityKernel::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw KernelError("cannot open grid density file '" + path + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw KernelError("malformed grid CSV at line " + std::to_string(line_no) + ": '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t", used) != std::string::npos) {
                throw KernelError("malformed grid CSV at line " + std::to_string(line_no) + ": '" + cell + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return GridDensityKernel(std::move(rows));
}

std::size_t GridDensityKernel::row_of(double c) const noexcept {
    const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(c * static_cast<double>(n_))));
    return std::min(i, n_ - 1);
}

double GridDensityKernel::conditional_cdf(double c, double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const std::size_t i = row_of(c);
    const double scaled = t * static_cast<double>(n_);
    const std::size_t k = std::min(static_cast<std::size_t>(scaled), n_ - 1);
    const double* cum = &cumulative_[i * (n_ + 1)];
    return cum[k] + conditional_[i * n_ + k] * (scaled - static_cast<double>(k));
}

double GridDensityKernel::expected_surplus(double c, double t) const {
    if (t <= 0.0) return 0.0;
    const std::size_t i = row_of(c);
    const double width = 1.0 / static_cast<double>(n_);
    const double* p = &conditional_[i * n_];
    if (t >= 1.0) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n_; ++j) mean += p[j] * (static_cast<double>(j) + 0.5) * width;
        return t - mean;
    }
    const double scaled = t * static_cast<double>(n_);
    const std::size_t k = std::min(static_cast<std::size_t>(scaled), n_ - 1);
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += p[j] * (t - (static_cast<double>(j) + 0.5) * width);
    const double part = t - static_cast<double>(k) * width;
    acc += p[k] * part * part / (2.0 * width);
    return acc;
}

double GridDensityKernel::sample(double c, CounterStream& stream) const {
    const std::size_t i = row_of(c);
    const double* cum = &cumulative_[i * (n_ + 1)];
    const double u = stream.uniform() * cum[n_];
    const auto it = std::upper_bound(cum + 1, cum + n_ + 1, u);
    const auto k = std::min(static_cast<std::size_t>(it - (cum + 1)), n_ - 1);
    return (static_cast<double>(k) + stream.uniform()) / static_cast<double>(n_);
}

// --------------------------------------------------------- CostKernel ----

CostKernel CostKernel::iid() { return CostKernel(IidKernel{}); }

CostKernel CostKernel::fgm(FgmParameter theta) { return CostKernel(FgmKernel{theta}); }

CostKernel CostKernel::grid_density(GridDensityKernel grid) { return CostKernel(std::move(grid)); }

CostKernel make_purely_sufficient_kernel(Budget w) {
    const double v = w.value();
    if (!(v > 0.0)) {
        throw InfeasibleError("purely sufficient kernel needs w > 0");
    }
    if (v > 0.5) {
        throw InfeasibleError("purely sufficient kernel is feasible only for w <= 1/2, got w = " + fmt(v));
    }
    return CostKernel(PurelySufficientKernel{v, v / (1.0 - v)});
}

CostKernel make_purely_sustained_kernel(Budget w) {
    const double v = w.value();
    if (!(v > 0.0) || v > 1.0) {
        throw ParameterError("purely sustained kernel needs 0 < w <= 1, got w = " + fmt(v));
    }
    return CostKernel(PurelySustainedKernel{v});
}

KernelKind CostKernel::kind() const noexcept {
    return std::visit(Overloaded{
                          [](const IidKernel&) { return KernelKind::Iid; },
                          [](const FgmKernel&) { return KernelKind::Fgm; },
                          [](const PurelySufficientKernel&) { return KernelKind::PurelySufficient; },
                          [](const PurelySustainedKernel&) { return KernelKind::PurelySustained; },
                          [](const GridDensityKernel&) { return KernelKind::GridDensity; },
                      },
                      law_);
}

double CostKernel::conditional_cdf(double c, double t) const {
    return std::visit(Overloaded{
                          [&](const IidKernel&) { return clamp01(t); },
                          [&](const FgmKernel& k) { return fgm_conditional_cdf_raw(c, t, k.theta.value()); },
                          [&](const PurelySufficientKernel& k) {
                              const double upper = uniform_cdf(t, k.w, 1.0);
                              if (c <= k.w) return upper;
                              return k.mix * uniform_cdf(t, 0.0, k.w) + (1.0 - k.mix) * upper;
                          },
                          [&](const PurelySustainedKernel& k) {
                              if (c <= k.w) return t >= k.w - c - kAtomSlack ? 1.0 : 0.0;
                              return uniform_cdf(t, k.w, 1.0);
                          },
                          [&](const GridDensityKernel& k) { return k.conditional_cdf(c, t); },
                      },
                      law_);
}

double CostKernel::expected_surplus(double c, double t) const {
    return std::visit(Overloaded{
                          [&](const IidKernel&) {
                              if (t <= 0.0) return 0.0;
                              return t <= 1.0 ? t * t / 2.0 : t - 0.5;
                          },
                          [&](const FgmKernel& k) { return fgm_surplus(c, t, k.theta.value()); },
                          [&](const PurelySufficientKernel& k) {
                              const double upper = uniform_surplus(t, k.w, 1.0);
                              if (c <= k.w) return upper;
                              return k.mix * uniform_surplus(t, 0.0, k.w) + (1.0 - k.mix) * upper;
                          },
                          [&](const PurelySustainedKernel& k) {
                              if (c <= k.w) return std::max(t - (k.w - c), 0.0);
                              return uniform_surplus(t, k.w, 1.0);
                          },
                          [&](const GridDensityKernel& k) { return k.expected_surplus(c, t); },
                      },
                      law_);
}

double CostKernel::sample(double c, CounterStream& stream) const {
    return std::visit(Overloaded{
                          [&](const IidKernel&) { return stream.uniform(); },
                          [&](const FgmKernel& k) {
                              return fgm_quantile_raw(c, stream.uniform(), k.theta.value());
                          },
                          [&](const PurelySufficientKernel& k) {
                              if (c <= k.w) return draw_upper(k.w, stream);
                              if (stream.uniform() < k.mix) return k.w * stream.uniform();
                              return draw_upper(k.w, stream);
                          },
                          [&](const PurelySustainedKernel& k) {
                              if (c <= k.w) return k.w - c;
                              return draw_upper(k.w, stream);
                          },
                          [&](const GridDensityKernel& k) { return k.sample(c, stream); },
                      },
                      law_);
}

std::optional<double> CostKernel::budget() const noexcept {
    if (const auto* k = std::get_if<PurelySufficientKernel>(&law_)) return k->w;
    if (const auto* k = std::get_if<PurelySustainedKernel>(&law_)) return k->w;
    return std::nullopt;
}

std::vector<double> CostKernel::breakpoints(std::span<const double> levels) const {
    std::vector<double> out;
    std::visit(Overloaded{
                   [](const IidKernel&) {},
                   [](const FgmKernel&) {},
                   [&](const PurelySufficientKernel& k) { out.push_back(k.w); },
                   [&](const PurelySustainedKernel& k) {
                       out.push_back(k.w);
                       for (double t : levels) out.push_back(k.w - t);
                   },
                   [&](const GridDensityKernel& k) {
                       for (std::size_t i = 1; i < k.size(); ++i) {
                           out.push_back(static_cast<double>(i) / static_cast<double>(k.size()));
                       }
                   },
               },
               law_);
    std::erase_if(out, [](double c) { return !(c > 0.0 && c < 1.0); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string CostKernel::description() const {
    return std::visit(Overloaded{
                          [](const IidKernel&) { return std::string("iid"); },
                          [](const FgmKernel& k) { return "fgm(theta=" + fmt(k.theta.value()) + ")"; },
                          [](const PurelySufficientKernel& k) { return "purely-sufficient(w=" + fmt(k.w) + ")"; },
                          [](const PurelySustainedKernel& k) { return "purely-sustained(w=" + fmt(k.w) + ")"; },
                          [](const GridDensityKernel& k) { return "grid-density(n=" + std::to_string(k.size()) + ")"; },
                      },
                      law_);
}

CostKernel make_kernel(const std::string& name, std::optional<double> w, std::optional<double> theta,
                       const std::string& grid_path) {
    if (name == "iid") {
        return CostKernel::iid();
    }
    if (name == "fgm") {
        if (!theta) throw ParameterError("kernel 'fgm' requires theta");
        return CostKernel::fgm(FgmParameter(*theta));
    }
    if (name == "sufficient") {
        if (!w) throw ParameterError("kernel 'sufficient' requires w");
        return make_purely_sufficient_kernel(Budget(*w));
    }
    if (name == "sustained") {
        if (!w) throw ParameterError("kernel 'sustained' requires w");
        return make_purely_sustained_kernel(Budget(*w));
    }
    if (name == "grid") {
        if (grid_path.empty()) throw ParameterError("kernel 'grid' requires a CSV path");
        return CostKernel::grid_density(GridDensityKernel::load_csv(grid_path));
    }
    throw ParameterError("unknown kernel '" + name + "' (expected iid, fgm, sufficient, sustained or grid)");
}

double marginal_deviation(const CostKernel& kernel) {
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double t = static_cast<double>(k) / 1000.0;
        const double level[] = {t};
        std::vector<double> cuts{0.0};
        for (double c : kernel.breakpoints(level)) cuts.push_back(c);
        cuts.push_back(1.0);
        double mass = 0.0;
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const auto piece = adaptive_simpson(
                [&](double c) { return kernel.conditional_cdf(inside(c, cuts[s], cuts[s + 1]), t); },
                cuts[s],
                                                cuts[s + 1], 1e-13 * (cuts[s + 1] - cuts[s]) + 1e-16, 30);
            mass += piece.value;
        }
        worst = std::max(worst, std::abs(mass - t));
    }
    return worst;
}

CostPair draw_pair(const CostKernel& kernel, std::uint64_t seed, std::uint64_t index) {
    CounterStream stream(seed, index);
    const double a = stream.uniform();
    return {a, kernel.sample(a, stream)};
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return v[l] < v[r]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

struct Moments {
    double covariance = 0.0;
    double correlation = 0.0;
    double covariance_stderr = 0.0;
};

Moments moments(const std::vector<double>& x, const std::vector<double>& y) {
    const auto m = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
    double sxx = 0.0, syy = 0.0, sxy = 0.0, sp2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        sp2 += dx * dx * dy * dy;
    }
    Moments out;
    out.covariance = sxy / (m - 1.0);
    out.correlation = sxy / std::sqrt(sxx * syy);
    const double mean_prod = sxy / m;
    const double var_prod = std::max(sp2 / m - mean_prod * mean_prod, 0.0) * m / (m - 1.0);
    out.covariance_stderr = std::sqrt(var_prod / m);
    return out;
}

}  // namespace

DependenceSummary dependence_summary(const CostKernel& kernel, std::uint64_t n, std::uint64_t seed) {
    if (n < 10000) {
        throw ParameterError("dependence_summary needs n >= 10^4, got " + std::to_string(n));
    }
    std::vector<double> a(n), b(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto pair = draw_pair(kernel, seed, i);
        a[i] = pair.a;
        b[i] = pair.b;
    }
    DependenceSummary out;
    out.n = n;
    out.seed = seed;
    out.threshold = std::min(kernel.budget().value_or(1.0), 1.0);
    out.spearman = moments(average_ranks(a), average_ranks(b)).correlation;

    std::vector<double> ca, cb;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (a[i] <= out.threshold) {
            ca.push_back(a[i]);
            cb.push_back(b[i]);
        }
    }
    out.conditional_samples = ca.size();
    if (ca.size() >= 2) {
        const auto m = moments(ca, cb);
        out.pearson_conditional_below_w = m.correlation;
        out.covariance_conditional_below_w = m.covariance;
        out.covariance_stderr = m.covariance_stderr;
    }
    return out;
}

}  // namespace schemelab
