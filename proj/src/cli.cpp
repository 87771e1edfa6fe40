#include "schemelab/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "schemelab/analytic.hpp"
#include "schemelab/errors.hpp"
#include "schemelab/kernels.hpp"
#include "schemelab/model.hpp"
#include "schemelab/montecarlo.hpp"
#include "schemelab/optimizer.hpp"
#include "schemelab/verify.hpp"

namespace schemelab::cli {

namespace {

using Json = nlohmann::ordered_json;

const std::vector<std::string> kCommands{"eval", "solve-iid", "solve-fgm", "sweep", "simulate", "verify"};

// Thrown for flag combinations that parse but make no sense together.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Rounds to 9 significant digits so the JSON writer's shortest round-trip
// form never prints more.
double sig9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

Json rule_json(const RewardRule& r) {
    return Json{{"x", sig9(r.x)}, {"y", sig9(r.y)}, {"z", sig9(r.z)}, {"w", sig9(r.w.value())}};
}

struct Flags {
    std::string kernel = "iid";
    std::optional<double> theta;
    std::optional<double> kernel_w;
    std::string grid;
    std::optional<double> w;
    double x = 0.0, y = 0.0, z = 0.0;
    std::uint64_t n = kDefaultDraws;
    std::uint64_t seed = kDefaultSeed;
    bool dependence = false;
    bool numeric = false;
    std::string mode = "iid";
    double w_min = 0.0, w_max = 0.0, step = 0.0;
    std::string suite = "all";
    std::string format;
    std::string out_path;
    SearchConfig search;
};

// Reads `key=value` lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + " is not key=value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

bool mentions(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Expands --config into explicit flags. Command-line flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a path");
            config = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (!config) return args;

    auto kv = read_config(*config);
    const bool has_command = !args.empty() && std::find(kCommands.begin(), kCommands.end(), args.front()) != kCommands.end();
    std::vector<std::string> out;
    if (has_command) {
        out.push_back(args.front());
        args.erase(args.begin());
    } else if (auto it = kv.find("command"); it != kv.end()) {
        out.push_back(it->second);
    } else {
        throw UsageError("no command given on the command line or in the config file");
    }
    kv.erase("command");
    for (const auto& [key, value] : kv) {
        const std::string flag = "--" + key;
        if (mentions(args, flag)) continue;
        if (value == "true" || value == "false") {
            if (value == "true") out.push_back(flag);
            continue;
        }
        out.push_back(flag);
        out.push_back(value);
    }
    out.insert(out.end(), args.begin(), args.end());
    return out;
}

void add_output(CLI::App* cmd, Flags& f, const std::string& default_format, std::vector<std::string> formats) {
    f.format = default_format;
    cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember(formats));
    cmd->add_option("--out", f.out_path, "Write output to this file instead of stdout");
}

void add_kernel(CLI::App* cmd, Flags& f) {
    cmd->add_option("--kernel", f.kernel, "Cost kernel")
        ->check(CLI::IsMember({"iid", "fgm", "sufficient", "sustained", "grid"}));
    cmd->add_option("--theta", f.theta, "FGM dependence parameter")->check(CLI::Range(-1.0, 1.0));
    cmd->add_option("--kernel-w", f.kernel_w, "Budget the constructed kernel is built for (default --w)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--grid", f.grid, "CSV density matrix for --kernel grid");
}

void add_rule(CLI::App* cmd, Flags& f) {
    cmd->add_option("--w", f.w, "Budget")->required()->check(CLI::NonNegativeNumber);
    cmd->add_option("--x", f.x, "Reward for a period-1 performance")->check(CLI::NonNegativeNumber);
    cmd->add_option("--y", f.y, "Reward for a period-2 performance after a skip")->check(CLI::NonNegativeNumber);
    cmd->add_option("--z", f.z, "Extra reward for a second performance")->check(CLI::NonNegativeNumber);
}

void add_search(CLI::App* cmd, Flags& f) {
    cmd->add_option("--coarse-step", f.search.coarse_step, "Coarse grid step for rewards")->check(CLI::PositiveNumber);
    cmd->add_option("--theta-step", f.search.theta_step, "Coarse grid step for theta")->check(CLI::PositiveNumber);
    cmd->add_option("--refine-tol", f.search.refine_tolerance, "Golden-section tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-sweeps", f.search.max_refine_sweeps, "Refinement sweeps")->check(CLI::NonNegativeNumber);
}

CostKernel kernel_from(const Flags& f) {
    if (f.theta && f.kernel != "fgm") throw UsageError("--theta only applies to --kernel fgm");
    if (!f.grid.empty() && f.kernel != "grid") throw UsageError("--grid only applies to --kernel grid");
    if (f.kernel_w && f.kernel != "sufficient" && f.kernel != "sustained") {
        throw UsageError("--kernel-w only applies to --kernel sufficient or sustained");
    }
    if (f.kernel == "fgm" && !f.theta) throw UsageError("--kernel fgm requires --theta");
    if (f.kernel == "grid" && f.grid.empty()) throw UsageError("--kernel grid requires --grid <csv>");
    return make_kernel(f.kernel, f.kernel_w ? f.kernel_w : f.w, f.theta, f.grid);
}

RewardRule rule_from(const Flags& f) {
    RewardRule rule{f.x, f.y, f.z, Budget(*f.w)};
    if (!rule.feasible()) {
        throw InfeasibleError("infeasible rule: need y <= w and x + z <= w");
    }
    return rule;
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
}

std::string cmd_eval(const Flags& f) {
    const auto kernel = kernel_from(f);
    const auto rule = rule_from(f);
    const auto ev = evaluate_scheme(kernel, rule);
    if (f.format == "csv") {
        return csv({"w", "x", "y", "z", "performance", "period1_mass", "period2_mass"},
                   {{fmt9(rule.w.value()), fmt9(rule.x), fmt9(rule.y), fmt9(rule.z), fmt9(ev.performance),
                     fmt9(ev.period1_mass), fmt9(ev.period2_mass)}});
    }
    Json intervals = Json::array();
    for (const auto& iv : ev.participation_set) intervals.push_back(Json::array({sig9(iv.lo), sig9(iv.hi)}));
    Json j;
    j["kernel"] = kernel.description();
    j["x"] = sig9(rule.x);
    j["y"] = sig9(rule.y);
    j["z"] = sig9(rule.z);
    j["w"] = sig9(rule.w.value());
    j["performance"] = sig9(ev.performance);
    j["period1_mass"] = sig9(ev.period1_mass);
    j["period2_mass"] = sig9(ev.period2_mass);
    j["participation_set"] = intervals;
    j["upper_bound"] = sig9(upper_bound(rule.w));
    return j.dump() + "\n";
}

std::string cmd_solve_iid(const Flags& f) {
    const double w = *f.w;
    RewardRule rule;
    double performance = 0.0;
    std::string label;
    bool equivalence = false;
    Json alternatives = Json::array();
    if (w >= 1.5) {
        rule = {0.0, 0.0, w, Budget(w)};
        performance = performance_iid(rule).performance;
        label = "trivial";
        equivalence = true;
    } else if (f.numeric) {
        const auto r = optimize_rule_iid(w, f.search);
        rule = r.rule;
        performance = r.performance;
        label = std::string(to_string(regime(w)));
        equivalence = w > 1.0;
    } else {
        const auto opt = optimal_rule_iid(w);
        rule = opt.rules.front();
        performance = performance_iid(rule).performance;
        label = std::string(to_string(regime(w)));
        equivalence = opt.z_equivalence_class;
        for (std::size_t i = 1; i < opt.rules.size(); ++i) alternatives.push_back(rule_json(opt.rules[i]));
    }
    if (f.format == "csv") {
        return csv({"w", "x", "y", "z", "performance"},
                   {{fmt9(w), fmt9(rule.x), fmt9(rule.y), fmt9(rule.z), fmt9(performance)}});
    }
    Json j;
    j["w"] = sig9(w);
    j["x"] = sig9(rule.x);
    j["y"] = sig9(rule.y);
    j["z"] = sig9(rule.z);
    j["performance"] = sig9(performance);
    j["regime"] = label;
    j["z_equivalence_class"] = equivalence;
    j["alternatives"] = alternatives;
    return j.dump() + "\n";
}

std::string cmd_solve_fgm(const Flags& f) {
    const auto r = optimize_fgm(*f.w, f.search);
    const double theta = r.theta ? r.theta->value() : 0.0;
    if (f.format == "csv") {
        return csv({"w", "x", "y", "z", "theta", "performance"},
                   {{fmt9(*f.w), fmt9(r.rule.x), fmt9(r.rule.y), fmt9(r.rule.z), fmt9(theta), fmt9(r.performance)}});
    }
    Json j;
    j["w"] = sig9(*f.w);
    j["x"] = sig9(r.rule.x);
    j["y"] = sig9(r.rule.y);
    j["z"] = sig9(r.rule.z);
    j["theta"] = sig9(theta);
    j["performance"] = sig9(r.performance);
    j["evaluations"] = r.evaluations;
    j["converged"] = r.converged;
    return j.dump() + "\n";
}

std::string cmd_sweep(const Flags& f) {
    const auto mode = parse_sweep_mode(f.mode);
    if (!mode) throw UsageError("unknown sweep mode '" + f.mode + "'");
    if (!(f.step > 0.0)) throw UsageError("--step must be positive");
    if (!(f.w_min < f.w_max) || !(f.w_max < 1.5)) throw UsageError("need 0 <= --w-min < --w-max < 1.5");
    auto config = f.search;
    config.threads = worker_threads();
    const auto rows = sweep(f.w_min, f.w_max, f.step, *mode, config);
    if (f.format == "json") {
        Json list = Json::array();
        for (const auto& r : rows) {
            Json row;
            row["w"] = sig9(r.w);
            row["x"] = sig9(r.rule.x);
            row["y"] = sig9(r.rule.y);
            row["z"] = sig9(r.rule.z);
            row["theta"] = r.theta ? Json(sig9(*r.theta)) : Json(nullptr);
            row["performance"] = sig9(r.performance);
            list.push_back(row);
        }
        Json j;
        j["mode"] = f.mode;
        j["rows"] = list;
        return j.dump() + "\n";
    }
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        cells.push_back({fmt9(r.w), fmt9(r.rule.x), fmt9(r.rule.y), fmt9(r.rule.z), r.theta ? fmt9(*r.theta) : "",
                         fmt9(r.performance)});
    }
    return csv({"w", "x", "y", "z", "theta", "performance"}, cells);
}

std::string cmd_simulate(const Flags& f) {
    if (f.n == 0) throw UsageError("--n must be at least 1");
    if (f.dependence && f.n < 10000) throw UsageError("--dependence needs --n >= 10000");
    const auto kernel = kernel_from(f);
    const auto rule = rule_from(f);
    const auto rep = simulate(kernel, rule, f.n, f.seed, {worker_threads(), f.dependence});
    if (f.format == "csv") {
        return csv({"estimate", "stderr", "n", "seed", "neither", "period1_only", "period2_only", "both"},
                   {{fmt9(rep.estimate), fmt9(rep.std_error), std::to_string(rep.n), std::to_string(rep.seed),
                     std::to_string(rep.counts.neither), std::to_string(rep.counts.period1_only),
                     std::to_string(rep.counts.period2_only), std::to_string(rep.counts.both)}});
    }
    Json j;
    j["kernel"] = kernel.description();
    j["x"] = sig9(rule.x);
    j["y"] = sig9(rule.y);
    j["z"] = sig9(rule.z);
    j["w"] = sig9(rule.w.value());
    j["estimate"] = sig9(rep.estimate);
    j["stderr"] = sig9(rep.std_error);
    j["n"] = rep.n;
    j["seed"] = rep.seed;
    j["counts"] = Json{{"neither", rep.counts.neither},
                       {"period1_only", rep.counts.period1_only},
                       {"period2_only", rep.counts.period2_only},
                       {"both", rep.counts.both}};
    if (rep.dependence) {
        const auto& d = *rep.dependence;
        j["dependence"] = Json{{"spearman", sig9(d.spearman)},
                               {"threshold", sig9(d.threshold)},
                               {"pearson_conditional_below_w", sig9(d.pearson_conditional_below_w)},
                               {"covariance_conditional_below_w", sig9(d.covariance_conditional_below_w)},
                               {"covariance_stderr", sig9(d.covariance_stderr)},
                               {"conditional_samples", d.conditional_samples}};
    }
    return j.dump() + "\n";
}

std::string cmd_verify(const Flags& f, bool& all_passed) {
    const auto suite = verify::parse_suite(f.suite);
    if (!suite) throw UsageError("unknown suite '" + f.suite + "'");
    verify::Options opt;
    opt.draws = f.n;
    opt.seed = f.seed;
    opt.threads = worker_threads();
    const auto results = verify::run_suite(*suite, opt);
    all_passed = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    if (f.format == "json") {
        Json list = Json::array();
        for (const auto& r : results) {
            list.push_back(Json{{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}});
        }
        Json j;
        j["suite"] = f.suite;
        j["passed"] = all_passed;
        j["checks"] = list;
        return j.dump() + "\n";
    }
    std::ostringstream os;
    for (const auto& r : results) {
        os << (r.passed ? "PASS " : "FAIL ") << r.id << " | " << r.title << " | " << r.detail << "\n";
    }
    os << (all_passed ? "all checks passed" : "some checks FAILED") << "\n";
    return os.str();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
        if (!file) throw Error("cannot write '" + tmp.string() + "'");
        file << text;
        if (!file.flush()) throw Error("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace

unsigned worker_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("SCHEME_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(cap, &end, 10);
        if (end != cap && v >= 1) n = std::min(n, static_cast<unsigned>(v));
    }
    return n;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    CLI::App app{"Two-period incentive scheme solver"};
    app.name("scheme_lab");
    app.require_subcommand(1);
    Flags f;

    auto* eval = app.add_subcommand("eval", "Evaluate a reward rule under a cost kernel");
    add_kernel(eval, f);
    add_rule(eval, f);
    add_output(eval, f, "json", {"json", "csv"});

    auto* solve_iid = app.add_subcommand("solve-iid", "Optimal rule for independent costs");
    solve_iid->add_option("--w", f.w, "Budget")->required()->check(CLI::NonNegativeNumber);
    solve_iid->add_flag("--numeric", f.numeric, "Use the grid + golden-section optimizer");
    add_search(solve_iid, f);
    add_output(solve_iid, f, "json", {"json", "csv"});

    auto* solve_fgm = app.add_subcommand("solve-fgm", "Joint optimum over reward rule and FGM theta");
    solve_fgm->add_option("--w", f.w, "Budget")->required()->check(CLI::Range(0.0, 1.4999999999));
    add_search(solve_fgm, f);
    add_output(solve_fgm, f, "json", {"json", "csv"});

    auto* sweep_cmd = app.add_subcommand("sweep", "Optimal schemes over a budget grid");
    sweep_cmd->add_option("--mode", f.mode, "iid, fgm or fgm_theta_zero")
        ->check(CLI::IsMember({"iid", "fgm", "fgm_theta_zero"}));
    sweep_cmd->add_option("--w-min", f.w_min, "First budget")->required()->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--w-max", f.w_max, "Budgets stop strictly below this")->required();
    sweep_cmd->add_option("--step", f.step, "Budget step")->required();
    add_search(sweep_cmd, f);
    add_output(sweep_cmd, f, "csv", {"csv", "json"});

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of performance");
    add_kernel(simulate_cmd, f);
    add_rule(simulate_cmd, f);
    simulate_cmd->add_option("--n", f.n, "Number of simulated agents");
    simulate_cmd->add_option("--seed", f.seed, "Random seed");
    simulate_cmd->add_flag("--dependence", f.dependence, "Also report dependence diagnostics");
    add_output(simulate_cmd, f, "json", {"json", "csv"});

    auto* verify_cmd = app.add_subcommand("verify", "Run the verification suites");
    verify_cmd->add_option("--suite", f.suite, "all, iid, fgm or schemes")
        ->check(CLI::IsMember({"all", "iid", "fgm", "schemes"}));
    verify_cmd->add_option("--n", f.n, "Monte Carlo draws per check");
    verify_cmd->add_option("--seed", f.seed, "Random seed");
    add_output(verify_cmd, f, "text", {"text", "json"});

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        std::string text;
        int status = kExitOk;
        if (eval->parsed()) {
            text = cmd_eval(f);
        } else if (solve_iid->parsed()) {
            text = cmd_solve_iid(f);
        } else if (solve_fgm->parsed()) {
            text = cmd_solve_fgm(f);
        } else if (sweep_cmd->parsed()) {
            text = cmd_sweep(f);
        } else if (simulate_cmd->parsed()) {
            text = cmd_simulate(f);
        } else {
            bool passed = false;
            text = cmd_verify(f, passed);
            status = passed ? kExitOk : kExitFailure;
        }
        emit(text, f.out_path, out);
        return status;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace schemelab::cli
