#include "nblearn/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "nblearn/config.hpp"
#include "nblearn/errors.hpp"
#include "nblearn/export.hpp"
#include "nblearn/rng.hpp"

namespace nblearn {

namespace {

int resolved_workers(const CliOptions& opt) {
    if (opt.workers > 0) return opt.workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::filesystem::path out_directory(const CliOptions& opt, const ExperimentConfig& cfg) {
    return opt.out_dir ? std::filesystem::path(*opt.out_dir)
                       : std::filesystem::path(cfg.output.directory);
}

bool contains(const std::vector<std::string>& v, const char* name) {
    return std::find(v.begin(), v.end(), name) != v.end();
}

// The concentration certificate applicable to this run, if any: geometric
// pooling on a mixing schedule or the accelerated rule, with a strict
// optimum. Returns nullopt when no certificate exists.
std::optional<RateConstants> certificate_for(const SimulationConfig& sim, double rho) {
    const int m = sim.hypothesis_count();
    if (sim.optimal.empty() || static_cast<int>(sim.optimal.size()) >= m) return std::nullopt;
    try {
        if (sim.rule == UpdateRuleKind::GeometricPool && sim.schedule) {
            const bool mixes = !sim.schedule->is_static() || sim.schedule->graph_at(0).connected();
            if (!mixes) return std::nullopt;
            return time_varying_constants(sim.agents, rho, sim.schedule->eta(), sim.schedule->window());
        }
        if (sim.rule == UpdateRuleKind::AcceleratedGeometric && sim.accelerated)
            return momentum_constants(sim.agents, rho, sim.accelerated->size_upper_bound);
    } catch (const std::exception&) {
        return std::nullopt;  // e.g. a prior ruling out every optimal hypothesis
    }
    return std::nullopt;
}

}  // namespace

int cmd_run(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_file(opt.config_path);
        validate_for_simulation(cfg);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    SimulationConfig sim = to_simulation(cfg);
    try {
        validate_config(sim);
    } catch (const std::invalid_argument& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitValidation;
    }

    const std::optional<RateConstants> constants = certificate_for(sim, cfg.run.rho);
    std::vector<std::string> artifacts = cfg.output.artifacts;
    if (artifacts.empty()) {
        artifacts = {"trajectory", "summary"};
        if (constants) artifacts.emplace_back("bounds");
    } else {
        if (contains(artifacts, "sweep")) {
            err << "error: output.artifacts: \"sweep\" is only produced by the sweep command\n";
            return kExitValidation;
        }
        if (contains(artifacts, "bounds") && !constants) {
            err << "error: output.artifacts: no concentration certificate applies to this "
                   "rule/scenario, so \"bounds\" cannot be produced\n";
            return kExitValidation;
        }
    }

    Trajectory traj;
    try {
        traj = run(sim);
    } catch (const DegeneratePosteriorError& e) {
        err << "error: degenerate posterior for agent " << e.agent() << " at step " << e.step()
            << " (seed " << sim.seed << ")\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }

    const std::filesystem::path dir = out_directory(opt, cfg);
    try {
        for (const auto& artifact : artifacts) {
            std::filesystem::path path;
            std::string content;
            if (artifact == "trajectory") {
                path = dir / "trajectory.csv";
                content = trajectory_csv(traj, sim.hypotheses);
            } else if (artifact == "summary") {
                path = dir / "summary.csv";
                content = summary_csv(traj, sim);
            } else {
                path = dir / "bounds.csv";
                content = bound_curve_csv(traj, *constants, sim.optimal);
            }
            write_file(path, content);
            if (!opt.quiet) out << "wrote " << path.string() << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: output: " << e.what() << '\n';
        return kExitRuntime;
    }

    if (!opt.quiet && !sim.optimal.empty()) {
        if (const auto k = convergence_time(traj, sim.optimal, sim.epsilon))
            out << "converged at step " << *k << " (epsilon " << sim.epsilon << ")\n";
        else
            out << "no convergence within horizon " << sim.horizon << " (epsilon " << sim.epsilon
                << ")\n";
    }
    return kExitSuccess;
}

namespace {

Graph family_graph(const std::string& family, int n) {
    if (family == "cycle") return Graph::cycle(n);
    if (family == "grid")
        return Graph::grid(static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
    return Graph::path(n);
}

}  // namespace

int cmd_sweep(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_file(opt.config_path);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    if (!cfg.sweep) {
        err << "error: sweep: required block missing\n";
        return kExitValidation;
    }
    if (!cfg.output.artifacts.empty() &&
        !(cfg.output.artifacts.size() == 1 && cfg.output.artifacts[0] == "sweep")) {
        err << "error: output.artifacts: the sweep command only produces \"sweep\"\n";
        return kExitValidation;
    }

    const SweepSpec& sweep = *cfg.sweep;
    const int workers = resolved_workers(opt);
    std::vector<SweepRow> rows;
    for (const int n : sweep.sizes) {
        const BuiltScenario scenario = build_one_informative(n, sweep.informative_accuracy);
        const Graph g = family_graph(sweep.family, n);
        for (const UpdateRuleKind rule : sweep.rules) {
            SimulationConfig sim;
            sim.hypotheses = scenario.hypotheses;
            sim.agents = scenario.agents;
            sim.rule = rule;
            sim.horizon = cfg.run.horizon;
            sim.seed = cfg.run.seed;  // shared across cells: matched seeds between rules
            sim.epsilon = cfg.run.epsilon;
            sim.record_stride = cfg.run.stride;
            sim.optimal = scenario.optimal;
            sim.stop_at_epsilon = true;
            try {
                if (rule == UpdateRuleKind::AcceleratedGeometric)
                    sim.accelerated = AcceleratedOperator::build(g, n);
                else
                    sim.schedule = GraphSchedule::fixed(g);
                validate_config(sim);
            } catch (const std::invalid_argument& e) {
                err << "error: sweep cell (size " << n << ", rule " << to_string(rule)
                    << "): " << e.what() << '\n';
                return kExitValidation;
            }

            MonteCarloSummary summary;
            try {
                summary = monte_carlo(sim, sweep.runs, cfg.run.rho, workers);
            } catch (const std::exception& e) {
                err << "error: " << e.what() << '\n';
                return kExitRuntime;
            }
            for (const auto& o : summary.outcomes) {
                if (o.degenerate) {
                    err << "error: degenerate posterior in sweep cell (size " << n << ", rule "
                        << to_string(rule) << "), run seed " << o.seed << ", agent "
                        << o.degenerate_agent << ", step " << o.degenerate_step << '\n';
                    return kExitRuntime;
                }
            }

            const std::vector<long> times = summary.convergence_times_sorted();
            SweepRow row;
            row.family = sweep.family;
            row.size = n;
            row.rule = rule;
            row.runs = sweep.runs;
            row.converged = static_cast<long>(times.size());
            if (!times.empty()) {
                const std::size_t h = times.size() / 2;
                row.median_time = times.size() % 2 == 1
                                      ? static_cast<double>(times[h])
                                      : 0.5 * (static_cast<double>(times[h - 1]) +
                                               static_cast<double>(times[h]));
                double mean = 0.0;
                for (const long t : times) mean += static_cast<double>(t);
                row.mean_time = mean / static_cast<double>(times.size());
            }
            rows.push_back(std::move(row));
        }
    }

    const std::filesystem::path path = out_directory(opt, cfg) / "sweep.csv";
    try {
        write_file(path, sweep_csv(rows));
    } catch (const std::exception& e) {
        err << "error: output: " << e.what() << '\n';
        return kExitRuntime;
    }
    if (!opt.quiet) out << "wrote " << path.string() << '\n';
    return kExitSuccess;
}

int cmd_verify(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_file(opt.config_path);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    const int workers = resolved_workers(opt);

    // Objects the checks run against, derived from whatever the config wired
    // up. The operator checks reuse the static graph with U = n when the rule
    // itself is not accelerated.
    std::optional<GraphSchedule> schedule = cfg.schedule;
    if (!schedule && cfg.accelerated) schedule = GraphSchedule::fixed(cfg.accelerated->graph);
    std::optional<AcceleratedOperator> op = cfg.accelerated;
    if (!op && cfg.schedule && cfg.schedule->is_static() && cfg.schedule->graph_at(0).connected())
        op = AcceleratedOperator::build(cfg.schedule->graph_at(0), cfg.schedule->node_count());
    std::optional<SimulationConfig> sim;
    bool has_certificate = false;
    if (!cfg.scenario.agents.empty()) {
        sim = to_simulation(cfg);
        has_certificate = certificate_for(*sim, cfg.run.rho).has_value();
    }

    std::vector<std::string> checks = cfg.verify.checks;
    if (checks.empty()) {
        if (schedule) {
            checks.emplace_back("stochasticity");
            checks.emplace_back("chain_deviation");
            checks.emplace_back("cumulative_mixing");
        }
        if (op) {
            checks.emplace_back("effective_operator");
            checks.emplace_back("consensus_contraction");
        }
        if (sim && has_certificate) checks.emplace_back("coverage");
        if (checks.empty()) {
            err << "error: verify: no applicable checks for this config\n";
            return kExitValidation;
        }
    }

    bool all_passed = true;
    for (const std::string& name : checks) {
        BoundCheckResult result;
        try {
            if (name == "stochasticity") {
                if (!schedule) throw ConfigError("verify.checks: stochasticity needs a schedule");
                result = check_schedule_stochasticity(*schedule, cfg.verify.stochasticity_horizon);
            } else if (name == "chain_deviation") {
                if (!schedule) throw ConfigError("verify.checks: chain_deviation needs a schedule");
                result = check_chain_deviation_bound(*schedule, cfg.verify.k_max);
            } else if (name == "cumulative_mixing") {
                if (!schedule)
                    throw ConfigError("verify.checks: cumulative_mixing needs a schedule");
                result = check_cumulative_mixing_bound(*schedule, cfg.verify.k_max);
            } else if (name == "effective_operator") {
                if (!op)
                    throw ConfigError(
                        "verify.checks: effective_operator needs a static connected schedule or "
                        "the accelerated rule");
                result = check_effective_operator_bound(*op, cfg.verify.k_max);
            } else if (name == "consensus_contraction") {
                if (!op)
                    throw ConfigError(
                        "verify.checks: consensus_contraction needs a static connected schedule "
                        "or the accelerated rule");
                const int n = op->node_count();
                const CounterRng rng(cfg.run.seed);
                Eigen::VectorXd x0(n);
                for (int i = 0; i < n; ++i) x0[i] = rng.uniform(0, static_cast<std::uint64_t>(i), 2);
                result = check_consensus_contraction(*op, x0, cfg.verify.k_max);
            } else if (name == "coverage") {
                if (!sim) throw ConfigError("verify.checks: coverage needs a scenario");
                result = check_coverage(*sim, cfg.verify.coverage_runs, cfg.run.rho, workers);
            } else if (name == "chain_deviation_family") {
                result = check_chain_deviation_family(cfg.verify.family);
            } else {
                result = check_cumulative_mixing_family(cfg.verify.family);
            }
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return kExitValidation;
        } catch (const std::invalid_argument& e) {
            err << "error: config: " << e.what() << '\n';
            return kExitValidation;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitRuntime;
        }
        if (!opt.quiet) out << result.line() << '\n';
        if (!result.passed) {
            all_passed = false;
            if (opt.quiet) err << result.line() << '\n';
        }
    }
    if (!opt.quiet)
        out << (all_passed ? "verification passed" : "verification FAILED") << '\n';
    return all_passed ? kExitSuccess : kExitVerification;
}

}  // namespace nblearn
