#include "nblearn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>

#include "nblearn/errors.hpp"
#include "nblearn/rng.hpp"

namespace nblearn {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(where + "." + item.key(), "unknown key");
    }
}

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

long as_integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<long>();
}

std::uint64_t as_seed(const json& j, const std::string& where) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0)
        return static_cast<std::uint64_t>(j.get<long long>());
    fail(where, "expected a non-negative integer");
}

bool as_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

double number_or(const json& j, const std::string& where, const char* key, double def) {
    const json* v = find(j, key);
    return v ? as_number(*v, where + "." + key) : def;
}

long integer_or(const json& j, const std::string& where, const char* key, long def) {
    const json* v = find(j, key);
    return v ? as_integer(*v, where + "." + key) : def;
}

bool bool_or(const json& j, const std::string& where, const char* key, bool def) {
    const json* v = find(j, key);
    return v ? as_bool(*v, where + "." + key) : def;
}

std::string string_or(const json& j, const std::string& where, const char* key, std::string def) {
    const json* v = find(j, key);
    return v ? as_string(*v, where + "." + key) : def;
}

std::vector<double> as_number_array(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::pair<double, double> as_point(const json& j, const std::string& where) {
    const auto v = as_number_array(j, where);
    if (v.size() != 2) fail(where, "expected [x, y]");
    return {v[0], v[1]};
}

std::vector<std::vector<double>> as_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    rows.reserve(j.size());
    for (std::size_t r = 0; r < j.size(); ++r)
        rows.push_back(as_number_array(j[r], where + "[" + std::to_string(r) + "]"));
    return rows;
}

// ---- scenario ----

LikelihoodModel model_from_tables(std::vector<double> truth, std::vector<std::vector<double>> rows,
                                  const std::string& where) {
    LikelihoodModel model;
    model.alphabet = SignalAlphabet::indexed(static_cast<int>(truth.size()));
    model.truth = std::move(truth);
    model.conditionals = std::move(rows);
    for (const auto& row : model.conditionals)
        if (row.size() != model.truth.size()) fail(where, "conditional row length must match truth length");
    model.support_floor = model.realized_support_floor();
    const auto violations = validate_model(model);
    if (!violations.empty()) fail(where, violations.front());
    return model;
}

std::vector<CliqueSpec> default_clique_specs() {
    // Two groups sharing the same two-row signal model but disagreeing on the
    // truth: the larger clique's data singles out hypothesis 0 exactly, the
    // smaller clique's data leans the other way. The merged optimum is
    // hypothesis 0 by the summed-divergence comparison.
    const std::vector<std::vector<double>> rows{{0.8, 0.2}, {0.2, 0.8}};
    CliqueSpec first{3, model_from_tables({0.8, 0.2}, rows, "scenario.cliques"), 1.0};
    CliqueSpec second{2, model_from_tables({0.35, 0.65}, rows, "scenario.cliques"), 1.0};
    return {first, second};
}

void parse_custom_scenario(const json& j, ExperimentConfig& cfg) {
    check_keys(j, "scenario", {"builder", "hypotheses", "agents"});
    const json* hyp = find(j, "hypotheses");
    if (!hyp) fail("scenario.hypotheses", "required key missing");
    HypothesisSet hypotheses;
    if (hyp->is_number_integer()) {
        const long m = as_integer(*hyp, "scenario.hypotheses");
        if (m < 1) fail("scenario.hypotheses", "need at least one hypothesis");
        hypotheses = HypothesisSet::numbered(static_cast<int>(m));
    } else if (hyp->is_array()) {
        for (std::size_t t = 0; t < hyp->size(); ++t)
            hypotheses.labels.push_back(as_string((*hyp)[t], "scenario.hypotheses[" + std::to_string(t) + "]"));
        if (hypotheses.labels.empty()) fail("scenario.hypotheses", "need at least one hypothesis");
    } else {
        fail("scenario.hypotheses", "expected a count or an array of labels");
    }

    const json* agents = find(j, "agents");
    if (!agents || !agents->is_array() || agents->empty())
        fail("scenario.agents", "expected a non-empty array");
    std::vector<AgentSpec> specs;
    for (std::size_t i = 0; i < agents->size(); ++i) {
        const std::string where = "scenario.agents[" + std::to_string(i) + "]";
        const json& a = (*agents)[i];
        check_keys(a, where, {"truth", "conditionals", "observation_rate", "prior", "support_floor"});
        const json* truth = find(a, "truth");
        const json* cond = find(a, "conditionals");
        if (!truth) fail(where + ".truth", "required key missing");
        if (!cond) fail(where + ".conditionals", "required key missing");
        AgentSpec spec;
        spec.model.truth = as_number_array(*truth, where + ".truth");
        spec.model.alphabet = SignalAlphabet::indexed(static_cast<int>(spec.model.truth.size()));
        spec.model.conditionals = as_matrix(*cond, where + ".conditionals");
        if (static_cast<int>(spec.model.conditionals.size()) != hypotheses.size())
            fail(where + ".conditionals", "need one row per hypothesis");
        for (const auto& row : spec.model.conditionals)
            if (row.size() != spec.model.truth.size())
                fail(where + ".conditionals", "row length must match truth length");
        spec.model.support_floor = number_or(a, where, "support_floor", spec.model.realized_support_floor());
        spec.observation_rate = number_or(a, where, "observation_rate", 1.0);
        if (const json* prior = find(a, "prior")) {
            const auto p = as_number_array(*prior, where + ".prior");
            if (static_cast<int>(p.size()) != hypotheses.size())
                fail(where + ".prior", "need one probability per hypothesis");
            try {
                spec.prior = BeliefState::from_probabilities(p);
            } catch (const std::exception& e) {
                fail(where + ".prior", e.what());
            }
        } else {
            spec.prior = uniform_prior(hypotheses.size());
        }
        const auto violations = validate_model(spec.model);
        if (!violations.empty()) fail(where, violations.front());
        specs.push_back(std::move(spec));
    }

    cfg.scenario.hypotheses = std::move(hypotheses);
    cfg.scenario.agents = std::move(specs);
    cfg.scenario.optimal = optimal_set_relative(cfg.scenario.agents);
    cfg.scenario.graph = Graph{};  // no built-in topology; the schedule block must name one
}

void parse_scenario(const json& j, ExperimentConfig& cfg) {
    if (!j.is_object()) fail("scenario", "expected an object");
    const json* builder = find(j, "builder");
    if (!builder) fail("scenario.builder", "required key missing");
    cfg.scenario_builder = as_string(*builder, "scenario.builder");
    const std::string& name = cfg.scenario_builder;
    try {
        if (name == "two_agent") {
            check_keys(j, "scenario", {"builder", "lo", "hi", "bins"});
            DiscretizationSpec disc = default_two_agent_discretization();
            disc.lo = number_or(j, "scenario", "lo", disc.lo);
            disc.hi = number_or(j, "scenario", "hi", disc.hi);
            disc.bins = static_cast<int>(integer_or(j, "scenario", "bins", disc.bins));
            cfg.scenario = build_two_agent_example(disc);
        } else if (name == "bernoulli_contrast") {
            check_keys(j, "scenario", {"builder", "agents", "observation_rate"});
            const long n = integer_or(j, "scenario", "agents", 6);
            const double q = number_or(j, "scenario", "observation_rate", 1.0);
            cfg.scenario = build_bernoulli_contrast(static_cast<int>(n), q);
        } else if (name == "one_informative") {
            check_keys(j, "scenario", {"builder", "agents", "informative_accuracy"});
            const long n = integer_or(j, "scenario", "agents", 8);
            const double acc = number_or(j, "scenario", "informative_accuracy", 0.9);
            cfg.scenario = build_one_informative(static_cast<int>(n), acc);
        } else if (name == "clique_merge") {
            check_keys(j, "scenario", {"builder", "mode", "cliques"});
            std::vector<CliqueSpec> cliques;
            if (const json* arr = find(j, "cliques")) {
                if (!arr->is_array() || arr->empty())
                    fail("scenario.cliques", "expected a non-empty array");
                for (std::size_t c = 0; c < arr->size(); ++c) {
                    const std::string where = "scenario.cliques[" + std::to_string(c) + "]";
                    const json& cj = (*arr)[c];
                    check_keys(cj, where, {"size", "truth", "conditionals", "observation_rate"});
                    const json* truth = find(cj, "truth");
                    const json* cond = find(cj, "conditionals");
                    if (!truth) fail(where + ".truth", "required key missing");
                    if (!cond) fail(where + ".conditionals", "required key missing");
                    CliqueSpec spec;
                    spec.size = static_cast<int>(integer_or(cj, where, "size", 0));
                    if (spec.size < 1) fail(where + ".size", "need at least one agent");
                    spec.model = model_from_tables(as_number_array(*truth, where + ".truth"),
                                                   as_matrix(*cond, where + ".conditionals"), where);
                    spec.observation_rate = number_or(cj, where, "observation_rate", 1.0);
                    cliques.push_back(std::move(spec));
                }
            } else {
                cliques = default_clique_specs();
            }
            const std::string mode = string_or(j, "scenario", "mode", "merged");
            if (mode != "merged" && mode != "isolated")
                fail("scenario.mode", "expected \"merged\" or \"isolated\"");
            CliqueMergeScenario cms = build_clique_merge(cliques);
            cfg.scenario.hypotheses = std::move(cms.hypotheses);
            cfg.scenario.agents = std::move(cms.agents);
            // The optimal set is a property of the models alone, independent
            // of which graph the run uses.
            cfg.scenario.optimal = std::move(cms.merged_optimal);
            cfg.scenario.graph = mode == "merged" ? std::move(cms.merged) : std::move(cms.isolated);
        } else if (name == "localization") {
            check_keys(j, "scenario",
                       {"builder", "grid_side", "area_half_extent", "source", "conflict_target",
                        "regular", "no_measurement", "conflicting", "noise_scale",
                        "truncation_sigmas", "bins", "comm_radius", "placement_seed",
                        "observation_rate"});
            LocalizationScenario params;
            params.grid_side = static_cast<int>(integer_or(j, "scenario", "grid_side", params.grid_side));
            params.area_half_extent =
                number_or(j, "scenario", "area_half_extent", params.area_half_extent);
            if (const json* p = find(j, "source")) params.source = as_point(*p, "scenario.source");
            if (const json* p = find(j, "conflict_target"))
                params.conflict_target = as_point(*p, "scenario.conflict_target");
            params.regular = static_cast<int>(integer_or(j, "scenario", "regular", params.regular));
            params.no_measurement =
                static_cast<int>(integer_or(j, "scenario", "no_measurement", params.no_measurement));
            params.conflicting =
                static_cast<int>(integer_or(j, "scenario", "conflicting", params.conflicting));
            params.noise_scale = number_or(j, "scenario", "noise_scale", params.noise_scale);
            params.truncation_sigmas =
                number_or(j, "scenario", "truncation_sigmas", params.truncation_sigmas);
            params.bins = static_cast<int>(integer_or(j, "scenario", "bins", params.bins));
            params.comm_radius = number_or(j, "scenario", "comm_radius", params.comm_radius);
            if (const json* p = find(j, "placement_seed"))
                params.placement_seed = as_seed(*p, "scenario.placement_seed");
            params.observation_rate =
                number_or(j, "scenario", "observation_rate", params.observation_rate);
            BuiltLocalization built = build_localization(params);
            cfg.scenario = built.scenario;
            cfg.localization = std::move(built);
        } else if (name == "custom") {
            parse_custom_scenario(j, cfg);
        } else {
            fail("scenario.builder", "unknown builder \"" + name + "\"");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail("scenario", e.what());
    }
}

// ---- rule / schedule ----

void parse_rule(const json* j, ExperimentConfig& cfg) {
    if (!j) return;
    check_keys(*j, "rule", {"kind", "size_upper_bound"});
    const std::string kind = string_or(*j, "rule", "kind", "geometric");
    const auto parsed = parse_rule_kind(kind);
    if (!parsed) fail("rule.kind", "unknown rule \"" + kind + "\"");
    cfg.rule = *parsed;
    cfg.size_upper_bound = static_cast<int>(integer_or(*j, "rule", "size_upper_bound", 0));
    if (cfg.size_upper_bound < 0) fail("rule.size_upper_bound", "must be non-negative");
    if (cfg.size_upper_bound != 0 && cfg.rule != UpdateRuleKind::AcceleratedGeometric)
        fail("rule.size_upper_bound", "only meaningful for the accelerated rule");
}

void parse_schedule_spec(const json* j, ExperimentConfig& cfg) {
    ScheduleSpec& spec = cfg.schedule_spec;
    spec.pool_seed = derive_seed(cfg.run.seed, 0x5eedULL);
    if (!j) return;
    check_keys(*j, "schedule", {"topology", "edges", "weights", "matrix", "time_varying"});
    spec.topology = string_or(*j, "schedule", "topology", spec.topology);
    spec.weights = string_or(*j, "schedule", "weights", spec.weights);
    if (const json* edges = find(*j, "edges")) {
        if (!edges->is_array()) fail("schedule.edges", "expected an array of [i, j] pairs");
        for (std::size_t e = 0; e < edges->size(); ++e) {
            const std::string where = "schedule.edges[" + std::to_string(e) + "]";
            const auto v = as_number_array((*edges)[e], where);
            if (v.size() != 2 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
                fail(where, "expected an integer pair [i, j]");
            spec.edges.emplace_back(static_cast<int>(v[0]), static_cast<int>(v[1]));
        }
        if (spec.topology != "custom") fail("schedule.edges", "only valid with topology = \"custom\"");
    }
    if (const json* m = find(*j, "matrix")) {
        if (spec.weights != "custom") fail("schedule.matrix", "only valid with weights = \"custom\"");
        const auto rows = as_matrix(*m, "schedule.matrix");
        const auto n = static_cast<Eigen::Index>(rows.size());
        WeightMatrix a(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            if (static_cast<Eigen::Index>(rows[r].size()) != n)
                fail("schedule.matrix", "matrix must be square");
            for (Eigen::Index c = 0; c < n; ++c) a(r, c) = rows[r][c];
        }
        spec.matrix = std::move(a);
    }
    if (const json* tv = find(*j, "time_varying")) {
        check_keys(*tv, "schedule.time_varying", {"window", "templates", "seed"});
        spec.time_varying = true;
        spec.window = static_cast<int>(integer_or(*tv, "schedule.time_varying", "window", 1));
        spec.templates = static_cast<int>(integer_or(*tv, "schedule.time_varying", "templates", 3));
        if (spec.window < 1) fail("schedule.time_varying.window", "must be positive");
        if (spec.templates < 1) fail("schedule.time_varying.templates", "must be positive");
        if (const json* s = find(*tv, "seed")) spec.pool_seed = as_seed(*s, "schedule.time_varying.seed");
    }
}

bool prior_is_uniform(const BeliefState& prior) {
    return prior.max_abs_diff(BeliefState::uniform(prior.size())) <= 1e-12;
}

Graph resolve_topology(const ExperimentConfig& cfg) {
    const ScheduleSpec& spec = cfg.schedule_spec;
    const int n = cfg.agent_count();
    if (spec.topology == "from_scenario") {
        if (cfg.scenario.graph.n != n)
            fail("schedule.topology", "scenario \"" + cfg.scenario_builder +
                                          "\" does not provide a communication graph; name one");
        return cfg.scenario.graph;
    }
    if (spec.topology == "path") return Graph::path(n);
    if (spec.topology == "cycle") return Graph::cycle(n);
    if (spec.topology == "complete") return Graph::complete(n);
    if (spec.topology == "grid") {
        const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
        if (side * side != n) fail("schedule.topology", "grid needs a square agent count");
        return Graph::grid(side);
    }
    if (spec.topology == "custom") {
        if (spec.edges.empty()) fail("schedule.edges", "required for topology = \"custom\"");
        try {
            return Graph::from_edges(n, spec.edges);
        } catch (const std::exception& e) {
            fail("schedule.edges", e.what());
        }
    }
    fail("schedule.topology", "unknown topology \"" + spec.topology + "\"");
}

void build_schedule(ExperimentConfig& cfg) {
    if (cfg.scenario.agents.empty()) return;  // nothing to wire up
    const ScheduleSpec& spec = cfg.schedule_spec;
    const Graph g = resolve_topology(cfg);

    if (cfg.rule == UpdateRuleKind::AcceleratedGeometric) {
        if (spec.time_varying)
            fail("schedule.time_varying", "the accelerated rule runs on a static schedule");
        if (spec.weights != "lazy_metropolis")
            fail("schedule.weights", "the accelerated rule builds its own lazy Metropolis weights");
        for (std::size_t i = 0; i < cfg.scenario.agents.size(); ++i)
            if (!prior_is_uniform(cfg.scenario.agents[i].prior))
                fail("rule.kind", "the accelerated rule requires uniform priors (agent " +
                                      std::to_string(i) + " differs)");
        const int u = cfg.size_upper_bound == 0 ? g.n : cfg.size_upper_bound;
        try {
            cfg.accelerated = AcceleratedOperator::build(g, u);
        } catch (const std::exception& e) {
            fail("rule", e.what());
        }
        return;
    }

    if (spec.weights == "custom") {
        if (!spec.matrix) fail("schedule.matrix", "required when weights = \"custom\"");
        if (spec.time_varying)
            fail("schedule.time_varying", "custom weight matrices describe a static schedule");
        try {
            // Deliberately not vetted for stochasticity here: the verification
            // command checks it and must be able to see broken inputs.
            cfg.schedule = GraphSchedule::fixed_custom(g, *spec.matrix);
        } catch (const std::exception& e) {
            fail("schedule.matrix", e.what());
        }
        return;
    }

    WeightRule wr;
    if (spec.weights == "lazy_metropolis") {
        wr = WeightRule::LazyMetropolis;
    } else if (spec.weights == "metropolis") {
        wr = WeightRule::Metropolis;
    } else {
        fail("schedule.weights", "unknown weight rule \"" + spec.weights + "\"");
    }
    try {
        if (spec.time_varying) {
            auto pool = window_pool_from_graph(g, spec.window, spec.templates, spec.pool_seed);
            cfg.schedule = GraphSchedule::cycling(std::move(pool), spec.pool_seed, wr);
        } else {
            cfg.schedule = GraphSchedule::fixed(g, wr);
        }
    } catch (const std::exception& e) {
        fail("schedule", e.what());
    }
}

// ---- run / sweep / verify / output ----

void parse_run(const json* j, RunSpec& run) {
    if (!j) fail("run", "required block missing");
    check_keys(*j, "run",
               {"seed", "horizon", "epsilon", "stride", "runs", "rho", "stop_at_epsilon"});
    const json* seed = find(*j, "seed");
    if (!seed) fail("run.seed", "required key missing; randomness never falls back to the clock");
    run.seed = as_seed(*seed, "run.seed");
    run.horizon = integer_or(*j, "run", "horizon", run.horizon);
    run.epsilon = number_or(*j, "run", "epsilon", run.epsilon);
    run.stride = integer_or(*j, "run", "stride", run.stride);
    run.runs = integer_or(*j, "run", "runs", run.runs);
    run.rho = number_or(*j, "run", "rho", run.rho);
    run.stop_at_epsilon = bool_or(*j, "run", "stop_at_epsilon", run.stop_at_epsilon);
    if (run.horizon < 0) fail("run.horizon", "must be non-negative");
    if (run.stride < 1) fail("run.stride", "must be positive");
    if (run.runs < 1) fail("run.runs", "must be positive");
    if (!(run.epsilon > 0.0 && run.epsilon < 1.0)) fail("run.epsilon", "must lie in (0, 1)");
    if (!(run.rho > 0.0 && run.rho < 1.0)) fail("run.rho", "must lie in (0, 1)");
}

void parse_sweep(const json* j, ExperimentConfig& cfg) {
    if (!j) return;
    check_keys(*j, "sweep", {"family", "sizes", "rules", "runs", "informative_accuracy"});
    SweepSpec sweep;
    sweep.family = string_or(*j, "sweep", "family", sweep.family);
    if (sweep.family != "path" && sweep.family != "cycle" && sweep.family != "grid")
        fail("sweep.family", "expected path, cycle, or grid");
    const json* sizes = find(*j, "sizes");
    if (!sizes || !sizes->is_array() || sizes->empty())
        fail("sweep.sizes", "expected a non-empty array of agent counts");
    for (std::size_t i = 0; i < sizes->size(); ++i) {
        const std::string where = "sweep.sizes[" + std::to_string(i) + "]";
        const long n = as_integer((*sizes)[i], where);
        if (n < 1) fail(where, "must be positive");
        if (sweep.family == "grid") {
            const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
            if (static_cast<long>(side) * side != n) fail(where, "grid sizes must be perfect squares");
        }
        sweep.sizes.push_back(static_cast<int>(n));
    }
    const json* rules = find(*j, "rules");
    if (!rules || !rules->is_array() || rules->empty())
        fail("sweep.rules", "expected a non-empty array of rule names");
    for (std::size_t i = 0; i < rules->size(); ++i) {
        const std::string where = "sweep.rules[" + std::to_string(i) + "]";
        const std::string name = as_string((*rules)[i], where);
        const auto parsed = parse_rule_kind(name);
        if (!parsed) fail(where, "unknown rule \"" + name + "\"");
        sweep.rules.push_back(*parsed);
    }
    sweep.runs = integer_or(*j, "sweep", "runs", sweep.runs);
    if (sweep.runs < 1) fail("sweep.runs", "must be positive");
    sweep.informative_accuracy =
        number_or(*j, "sweep", "informative_accuracy", sweep.informative_accuracy);
    cfg.sweep = std::move(sweep);
}

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{
        "stochasticity",        "chain_deviation",        "cumulative_mixing",
        "effective_operator",   "consensus_contraction",  "coverage",
        "chain_deviation_family", "cumulative_mixing_family"};
    return names;
}

void parse_verify(const json* j, VerifySpec& verify) {
    if (!j) return;
    check_keys(*j, "verify",
               {"checks", "k_max", "stochasticity_horizon", "coverage_runs", "family"});
    if (const json* checks = find(*j, "checks")) {
        if (!checks->is_array()) fail("verify.checks", "expected an array of check names");
        for (std::size_t i = 0; i < checks->size(); ++i) {
            const std::string where = "verify.checks[" + std::to_string(i) + "]";
            const std::string name = as_string((*checks)[i], where);
            const auto& known = known_checks();
            if (std::find(known.begin(), known.end(), name) == known.end())
                fail(where, "unknown check \"" + name + "\"");
            verify.checks.push_back(name);
        }
        if (verify.checks.empty()) fail("verify.checks", "expected at least one check");
    }
    verify.k_max = integer_or(*j, "verify", "k_max", verify.k_max);
    verify.stochasticity_horizon =
        integer_or(*j, "verify", "stochasticity_horizon", verify.stochasticity_horizon);
    verify.coverage_runs = integer_or(*j, "verify", "coverage_runs", verify.coverage_runs);
    if (verify.k_max < 1) fail("verify.k_max", "must be positive");
    if (verify.stochasticity_horizon < 1) fail("verify.stochasticity_horizon", "must be positive");
    if (verify.coverage_runs < 1) fail("verify.coverage_runs", "must be positive");
    if (const json* fam = find(*j, "family")) {
        check_keys(*fam, "verify.family", {"schedules", "n_max", "b_max", "k_max", "seed"});
        verify.family.schedules =
            static_cast<int>(integer_or(*fam, "verify.family", "schedules", verify.family.schedules));
        verify.family.n_max =
            static_cast<int>(integer_or(*fam, "verify.family", "n_max", verify.family.n_max));
        verify.family.b_max =
            static_cast<int>(integer_or(*fam, "verify.family", "b_max", verify.family.b_max));
        verify.family.k_max = integer_or(*fam, "verify.family", "k_max", verify.family.k_max);
        if (const json* s = find(*fam, "seed")) verify.family.seed = as_seed(*s, "verify.family.seed");
        if (verify.family.schedules < 1) fail("verify.family.schedules", "must be positive");
        if (verify.family.n_max < 2) fail("verify.family.n_max", "must be at least 2");
        if (verify.family.b_max < 1) fail("verify.family.b_max", "must be positive");
        if (verify.family.k_max < 1) fail("verify.family.k_max", "must be positive");
    }
}

void parse_output(const json* j, OutputSpec& output) {
    if (!j) return;
    check_keys(*j, "output", {"directory", "artifacts"});
    output.directory = string_or(*j, "output", "directory", output.directory);
    if (const json* arts = find(*j, "artifacts")) {
        if (!arts->is_array()) fail("output.artifacts", "expected an array of artifact names");
        for (std::size_t i = 0; i < arts->size(); ++i) {
            const std::string where = "output.artifacts[" + std::to_string(i) + "]";
            const std::string name = as_string((*arts)[i], where);
            if (name != "trajectory" && name != "summary" && name != "bounds" && name != "sweep")
                fail(where, "unknown artifact \"" + name + "\"");
            output.artifacts.push_back(name);
        }
    }
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    check_keys(root, "config",
               {"version", "scenario", "rule", "schedule", "run", "sweep", "verify", "output"});

    ExperimentConfig cfg;
    const json* version = find(root, "version");
    if (!version) fail("version", "required key missing");
    cfg.version = static_cast<int>(as_integer(*version, "version"));
    if (cfg.version != 1) fail("version", "unsupported config version " + std::to_string(cfg.version));

    parse_run(find(root, "run"), cfg.run);
    if (const json* scenario = find(root, "scenario")) parse_scenario(*scenario, cfg);
    parse_rule(find(root, "rule"), cfg);
    parse_schedule_spec(find(root, "schedule"), cfg);
    build_schedule(cfg);
    parse_sweep(find(root, "sweep"), cfg);
    parse_verify(find(root, "verify"), cfg.verify);
    parse_output(find(root, "output"), cfg.output);
    return cfg;
}

ExperimentConfig load_experiment_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment(buffer.str());
}

void validate_for_simulation(const ExperimentConfig& config) {
    if (config.scenario.agents.empty())
        throw ConfigError("scenario: required for simulation commands");
    if (config.schedule_spec.weights == "custom" && config.schedule) {
        const auto violations =
            check_weight_matrix(config.schedule->weights_at(0), config.schedule->graph_at(0));
        if (!violations.empty())
            throw ConfigError("schedule.matrix: " + violations.front());
    }
}

SimulationConfig to_simulation(const ExperimentConfig& config) {
    SimulationConfig sim;
    sim.hypotheses = config.scenario.hypotheses;
    sim.agents = config.scenario.agents;
    sim.rule = config.rule;
    sim.schedule = config.schedule;
    sim.accelerated = config.accelerated;
    sim.horizon = config.run.horizon;
    sim.seed = config.run.seed;
    sim.epsilon = config.run.epsilon;
    sim.record_stride = config.run.stride;
    sim.optimal = config.scenario.optimal;
    sim.stop_at_epsilon = config.run.stop_at_epsilon;
    return sim;
}

}  // namespace nblearn
