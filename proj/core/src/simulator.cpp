#include "nblearn/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "nblearn/rng.hpp"

namespace nblearn {

namespace {

std::uint64_t fold_double(std::uint64_t h, double v) {
    return hash_mix(h, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t fold_graph(std::uint64_t h, const Graph& g) {
    h = hash_mix(h, static_cast<std::uint64_t>(g.n));
    for (const auto& [i, j] : g.edges) h = hash_mix(h, (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j));
    return h;
}

std::uint64_t fold_matrix(std::uint64_t h, const WeightMatrix& a) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) h = fold_double(h, a(i, j));
    return h;
}

bool uses_accelerated(UpdateRuleKind rule) { return rule == UpdateRuleKind::AcceleratedGeometric; }

}  // namespace

void validate_config(const SimulationConfig& config) {
    if (config.agents.empty()) throw std::invalid_argument("config has no agents");
    const int m = config.hypothesis_count();
    if (m < 1) throw std::invalid_argument("config has an empty hypothesis set");
    const int n = config.agent_count();
    for (int i = 0; i < n; ++i) {
        const auto& a = config.agents[i];
        const auto violations = validate_model(a.model);
        if (!violations.empty())
            throw std::invalid_argument("agent " + std::to_string(i) + ": " + violations.front());
        if (a.model.hypothesis_count() != m)
            throw std::invalid_argument("agent " + std::to_string(i) +
                                        " disagrees with the hypothesis set size");
        if (a.prior.size() != m)
            throw std::invalid_argument("agent " + std::to_string(i) + " has a misshapen prior");
        if (!(a.observation_rate >= 0.0 && a.observation_rate <= 1.0))
            throw std::invalid_argument("agent " + std::to_string(i) +
                                        " has an observation rate outside [0,1]");
    }
    if (config.horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    if (config.record_stride < 1) throw std::invalid_argument("record stride must be positive");
    if (!(config.epsilon > 0.0 && config.epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in (0,1)");
    for (int t : config.optimal)
        if (t < 0 || t >= m) throw std::invalid_argument("optimal hypothesis index out of range");

    if (uses_accelerated(config.rule)) {
        if (!config.accelerated)
            throw std::invalid_argument("accelerated rule needs the momentum consensus operator");
        if (config.accelerated->node_count() != n)
            throw std::invalid_argument("momentum operator size does not match the agent count");
        const BeliefState u = BeliefState::uniform(m);
        for (int i = 0; i < n; ++i)
            if (config.agents[i].prior.max_abs_diff(u) > 1e-9)
                throw std::invalid_argument("accelerated rule requires uniform priors");
    } else {
        if (!config.schedule) throw std::invalid_argument("rule needs a graph schedule");
        if (config.schedule->node_count() != n)
            throw std::invalid_argument("schedule size does not match the agent count");
    }
}

std::uint64_t config_fingerprint(const SimulationConfig& config) {
    std::uint64_t h = hash_mix(0x636f6e666967ULL, static_cast<std::uint64_t>(config.rule));
    h = hash_mix(h, static_cast<std::uint64_t>(config.horizon));
    h = hash_mix(h, static_cast<std::uint64_t>(config.record_stride));
    h = fold_double(h, config.epsilon);
    h = hash_mix(h, config.stop_at_epsilon ? 1 : 0);
    for (const auto& label : config.hypotheses.labels)
        for (char c : label) h = hash_mix(h, static_cast<std::uint64_t>(c));
    for (const auto& a : config.agents) {
        h = fold_double(h, a.observation_rate);
        for (double v : a.model.alphabet.values) h = fold_double(h, v);
        for (double v : a.model.truth) h = fold_double(h, v);
        for (const auto& row : a.model.conditionals)
            for (double v : row) h = fold_double(h, v);
        h = fold_double(h, a.model.support_floor);
        for (double v : a.prior.log_probs()) h = fold_double(h, v);
    }
    if (config.schedule) {
        h = hash_mix(h, static_cast<std::uint64_t>(config.schedule->window()));
        h = fold_double(h, config.schedule->eta());
        for (long k = 0; k < config.schedule->window(); ++k)
            h = fold_matrix(fold_graph(h, config.schedule->graph_at(k)), config.schedule->weights_at(k));
    }
    if (config.accelerated) {
        h = fold_graph(h, config.accelerated->graph);
        h = fold_matrix(h, config.accelerated->a_bar);
        h = fold_double(h, config.accelerated->sigma);
    }
    for (int t : config.optimal) h = hash_mix(h, static_cast<std::uint64_t>(t));
    return h;
}

double NetworkState::max_off_optimal(std::span<const int> optimal) const {
    const int m = memories.front().current.size();
    std::vector<char> is_opt(m, 0);
    for (int t : optimal) is_opt[t] = 1;
    double worst = 0.0;
    for (const auto& mem : memories)
        for (int t = 0; t < m; ++t)
            if (!is_opt[t]) worst = std::max(worst, mem.current.prob(t));
    return worst;
}

NetworkState initial_state(const SimulationConfig& config) {
    NetworkState st;
    st.k = 0;
    const int n = config.agent_count();
    st.memories.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& mem = st.memories[i];
        mem.current = config.agents[i].prior;
        if (uses_accelerated(config.rule)) {
            mem.previous = mem.current;  // history seeded with the prior, no signal term
            mem.prev_log_likelihood.assign(config.hypothesis_count(), 0.0);
        }
    }
    st.beta.assign(n, 0);
    st.signals.assign(n, -1);
    return st;
}

void step(NetworkState& state, const SimulationConfig& config, std::uint64_t seed) {
    const int n = config.agent_count();
    const int m = config.hypothesis_count();
    const CounterRng rng(seed);
    const long k = state.k;

    // Draw this round's observation flags and signals for every agent first;
    // the draws are keyed by (step, agent), so every rule sees the same data.
    std::vector<std::uint8_t> beta(n, 0);
    std::vector<int> signals(n, -1);
    for (int i = 0; i < n; ++i) {
        const auto& agent = config.agents[i];
        if (rng.bernoulli(agent.observation_rate, k, i, CounterRng::kStreamBeta)) {
            beta[i] = 1;
            signals[i] = rng.categorical(agent.model.truth, k, i, CounterRng::kStreamSignal);
        }
    }

    // Likelihood columns log l^j(s_j | .) for agents that observed, used by
    // the sharing and centralized rules.
    std::vector<std::vector<double>> columns(n);
    std::vector<const std::vector<double>*> column_ptrs(n, nullptr);
    if (config.rule == UpdateRuleKind::LikelihoodSharing ||
        config.rule == UpdateRuleKind::CentralizedBayes) {
        for (int i = 0; i < n; ++i) {
            if (beta[i]) {
                columns[i] = config.agents[i].model.log_likelihood_column(signals[i]);
                column_ptrs[i] = &columns[i];
            }
        }
    }

    std::vector<BeliefState> current(n);
    for (int i = 0; i < n; ++i) current[i] = state.memories[i].current;

    std::vector<BeliefState> next(n);
    for (int i = 0; i < n; ++i) {
        const auto& agent = config.agents[i];
        const std::optional<int> own = beta[i] ? std::optional<int>(signals[i]) : std::nullopt;
        try {
            switch (config.rule) {
                case UpdateRuleKind::GeometricPool: {
                    const WeightMatrix& a = config.schedule->weights_at(k);
                    std::vector<double> w(n);
                    for (int j = 0; j < n; ++j) w[j] = a(i, j);
                    next[i] = geometric_pool_update(w, current, agent.model, own);
                    break;
                }
                case UpdateRuleKind::AcceleratedGeometric: {
                    const WeightMatrix& a = config.accelerated->a_bar;
                    std::vector<double> w(n);
                    for (int j = 0; j < n; ++j) w[j] = a(i, j);
                    next[i] = accelerated_update(w, state.memories, config.accelerated->sigma,
                                                 agent.model, own);
                    break;
                }
                case UpdateRuleKind::LinearPoolThenBayes: {
                    const WeightMatrix& a = config.schedule->weights_at(k);
                    std::vector<double> w(n);
                    for (int j = 0; j < n; ++j) w[j] = a(i, j);
                    next[i] = linear_pool_then_bayes(w, current, agent.model, own);
                    break;
                }
                case UpdateRuleKind::BayesThenLinearPool: {
                    const WeightMatrix& a = config.schedule->weights_at(k);
                    std::vector<double> w(n);
                    std::vector<const LikelihoodModel*> models(n);
                    std::vector<std::optional<int>> syms(n);
                    for (int j = 0; j < n; ++j) {
                        w[j] = a(i, j);
                        models[j] = &config.agents[j].model;
                        syms[j] = beta[j] ? std::optional<int>(signals[j]) : std::nullopt;
                    }
                    next[i] = bayes_then_linear_pool(w, current, models, syms);
                    break;
                }
                case UpdateRuleKind::LikelihoodSharing: {
                    const WeightMatrix& a = config.schedule->weights_at(k);
                    std::vector<double> w(n);
                    for (int j = 0; j < n; ++j) w[j] = a(i, j);
                    next[i] = likelihood_sharing_update(current[i], w, column_ptrs);
                    break;
                }
                case UpdateRuleKind::CentralizedBayes: {
                    next[i] = centralized_bayes_update(current[i], column_ptrs);
                    break;
                }
            }
        } catch (const DegeneratePosteriorError& e) {
            throw e.with_context(i, k + 1);  // the posterior being formed belongs to round k+1
        }
    }

    // Commit synchronously.
    for (int i = 0; i < n; ++i) {
        auto& mem = state.memories[i];
        if (uses_accelerated(config.rule)) {
            mem.previous = mem.current;
            if (beta[i])
                mem.prev_log_likelihood = config.agents[i].model.log_likelihood_column(signals[i]);
            else
                mem.prev_log_likelihood.assign(m, 0.0);
        }
        mem.current = std::move(next[i]);
    }
    state.beta = std::move(beta);
    state.signals = std::move(signals);
    state.k = k + 1;
}

const TrajectoryRecord& Trajectory::final_record() const {
    if (records.empty()) throw std::logic_error("trajectory has no records");
    return records.back();
}

namespace {

TrajectoryRecord make_record(const NetworkState& st) {
    TrajectoryRecord rec;
    rec.k = st.k;
    rec.beliefs.reserve(st.memories.size());
    for (const auto& mem : st.memories) rec.beliefs.push_back(mem.current);
    rec.beta = st.beta;
    rec.signals = st.signals;
    return rec;
}

}  // namespace

Trajectory run_with_seed(const SimulationConfig& config, std::uint64_t seed,
                         const StepObserver& observer) {
    validate_config(config);
    NetworkState st = initial_state(config);
    Trajectory traj;
    traj.seed = seed;
    traj.fingerprint = config_fingerprint(config);
    traj.records.push_back(make_record(st));
    for (long k = 0; k < config.horizon; ++k) {
        step(st, config, seed);
        if (observer) observer(st);
        const bool converged = config.stop_at_epsilon && !config.optimal.empty() &&
                               st.max_off_optimal(config.optimal) < config.epsilon;
        if (st.k % config.record_stride == 0 || st.k == config.horizon || converged)
            traj.records.push_back(make_record(st));
        if (converged) break;
    }
    return traj;
}

Trajectory run(const SimulationConfig& config) { return run_with_seed(config, config.seed); }

std::optional<long> convergence_time(const Trajectory& trajectory, std::span<const int> optimal,
                                     double epsilon) {
    if (optimal.empty()) throw std::invalid_argument("convergence time needs a non-empty optimal set");
    for (const auto& rec : trajectory.records) {
        const int m = rec.beliefs.front().size();
        std::vector<char> is_opt(m, 0);
        for (int t : optimal) is_opt[t] = 1;
        double worst = 0.0;
        for (const auto& b : rec.beliefs)
            for (int t = 0; t < m; ++t)
                if (!is_opt[t]) worst = std::max(worst, b.prob(t));
        if (worst < epsilon) return rec.k;
    }
    return std::nullopt;
}

long MonteCarloSummary::violation_count() const {
    long c = 0;
    for (const auto& o : outcomes) c += o.bound_checked && o.bound_violated ? 1 : 0;
    return c;
}

long MonteCarloSummary::degenerate_count() const {
    long c = 0;
    for (const auto& o : outcomes) c += o.degenerate ? 1 : 0;
    return c;
}

std::vector<long> MonteCarloSummary::convergence_times_sorted() const {
    std::vector<long> t;
    for (const auto& o : outcomes)
        if (o.convergence_time) t.push_back(*o.convergence_time);
    std::sort(t.begin(), t.end());
    return t;
}

MonteCarloSummary monte_carlo(const SimulationConfig& config, long runs, double rho, int workers) {
    validate_config(config);
    if (runs < 1) throw std::invalid_argument("ensemble needs at least one run");
    if (workers < 1) throw std::invalid_argument("worker count must be positive");

    MonteCarloSummary summary;
    summary.runs = runs;

    // Concentration certificate, when one applies to the rule and scenario.
    const int m = config.hypothesis_count();
    const bool strict_optimum = !config.optimal.empty() && static_cast<int>(config.optimal.size()) < m;
    if (strict_optimum) {
        // Scenarios outside a certificate's hypotheses (zero support floor,
        // dogmatic priors, ...) simply run uncertified.
        try {
            if (config.rule == UpdateRuleKind::GeometricPool) {
                // Static schedules must mix (cycling pools are connected by
                // construction); otherwise no certificate exists.
                const bool mixes =
                    !config.schedule->is_static() || config.schedule->graph_at(0).connected();
                if (mixes)
                    summary.constants = time_varying_constants(config.agents, rho, config.schedule->eta(),
                                                           config.schedule->window());
            } else if (config.rule == UpdateRuleKind::AcceleratedGeometric) {
                summary.constants =
                    momentum_constants(config.agents, rho, config.accelerated->size_upper_bound);
            }
        } catch (const std::invalid_argument&) {
            summary.constants.reset();
        }
    }

    std::vector<char> is_opt(m, 0);
    for (int t : config.optimal) is_opt[t] = 1;

    summary.outcomes.resize(runs);
    std::atomic<long> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const long r = cursor.fetch_add(1);
            if (r >= runs) return;
            RunOutcome out;
            out.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
            const RateConstants* consts = summary.constants ? &*summary.constants : nullptr;
            out.bound_checked = consts != nullptr;
            StepObserver observer;
            if (consts) {
                observer = [&, consts](const NetworkState& st) {
                    if (out.bound_violated || st.k < consts->threshold_step) return;
                    for (std::size_t i = 0; i < st.memories.size(); ++i) {
                        const double lb = consts->log_bound(st.k, static_cast<int>(i));
                        for (int t = 0; t < m; ++t) {
                            if (is_opt[t]) continue;
                            if (st.memories[i].current.log_prob(t) > lb) {
                                out.bound_violated = true;
                                return;
                            }
                        }
                    }
                };
            }
            try {
                const Trajectory traj = run_with_seed(config, out.seed, observer);
                if (!config.optimal.empty())
                    out.convergence_time = convergence_time(traj, config.optimal, config.epsilon);
                out.max_off_optimal.reserve(traj.records.size());
                for (const auto& rec : traj.records) {
                    double worst = 0.0;
                    for (const auto& b : rec.beliefs)
                        for (int t = 0; t < m; ++t)
                            if (!is_opt[t]) worst = std::max(worst, b.prob(t));
                    out.max_off_optimal.push_back(worst);
                }
                if (r == 0)
                    for (const auto& rec : traj.records) summary.record_steps.push_back(rec.k);
            } catch (const DegeneratePosteriorError& e) {
                out.degenerate = true;
                out.degenerate_agent = e.agent();
                out.degenerate_step = e.step();
            }
            summary.outcomes[r] = std::move(out);
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int count = static_cast<int>(std::min<long>(workers, runs));
        pool.reserve(count);
        for (int w = 0; w < count; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Aggregate only when every run recorded the same steps.
    const bool aligned = !config.stop_at_epsilon &&
                         std::all_of(summary.outcomes.begin(), summary.outcomes.end(),
                                     [&](const RunOutcome& o) {
                                         return !o.degenerate &&
                                                o.max_off_optimal.size() == summary.record_steps.size();
                                     });
    if (aligned && !summary.record_steps.empty()) {
        const std::size_t rcount = summary.record_steps.size();
        summary.q_min.resize(rcount);
        summary.q_median.resize(rcount);
        summary.q_max.resize(rcount);
        summary.q_mean.resize(rcount);
        std::vector<double> col(runs);
        for (std::size_t rstep = 0; rstep < rcount; ++rstep) {
            for (long r = 0; r < runs; ++r) col[r] = summary.outcomes[r].max_off_optimal[rstep];
            std::sort(col.begin(), col.end());
            summary.q_min[rstep] = col.front();
            summary.q_max[rstep] = col.back();
            summary.q_median[rstep] =
                runs % 2 == 1 ? col[runs / 2] : 0.5 * (col[runs / 2 - 1] + col[runs / 2]);
            double mean = 0.0;
            for (double v : col) mean += v;
            summary.q_mean[rstep] = mean / static_cast<double>(runs);
        }
    }
    return summary;
}

}  // namespace nblearn
