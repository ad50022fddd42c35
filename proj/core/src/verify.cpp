#include "nblearn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nblearn/rng.hpp"

namespace nblearn {

namespace {

std::string format_margin(double margin) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << margin;
    return os.str();
}

struct WorstCase {
    double margin = std::numeric_limits<double>::infinity();
    std::string detail;
    long cases = 0;

    void update(double m, const std::string& d) {
        ++cases;
        if (m < margin) {
            margin = m;
            detail = d;
        }
    }
};

BoundCheckResult finish(std::string name, const WorstCase& w) {
    BoundCheckResult r;
    r.name = std::move(name);
    r.cases = w.cases;
    r.margin = w.margin;
    r.detail = w.detail;
    r.passed = w.margin >= 0.0;
    return r;
}

}  // namespace

std::string BoundCheckResult::line() const {
    std::string s = passed ? "[PASS] " : "[FAIL] ";
    s += name + ": " + std::to_string(cases) + " checks, worst margin " + format_margin(margin);
    if (!detail.empty()) s += " (" + detail + ")";
    return s;
}

BoundCheckResult check_chain_deviation_bound(const GraphSchedule& schedule, long k_max) {
    const int n = schedule.node_count();
    const double lambda = mixing_bound_lambda(n, schedule.eta(), schedule.window());
    const double inv_n = 1.0 / static_cast<double>(n);
    WorstCase w;
    for (long k = 0; k <= k_max; ++k) {
        // Walk t downward from k, extending the chain on the right.
        WeightMatrix p = schedule.weights_at(k);
        for (long t = k; t >= 0; --t) {
            if (t < k) p = p * schedule.weights_at(t);
            const double envelope = std::numbers::sqrt2 * std::pow(lambda, static_cast<double>(k - t));
            double dev = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) dev = std::max(dev, std::abs(p(i, j) - inv_n));
            w.update(envelope - dev, "k=" + std::to_string(k) + " t=" + std::to_string(t));
        }
    }
    return finish("chain deviation envelope", w);
}

BoundCheckResult check_cumulative_mixing_bound(const GraphSchedule& schedule, long k_max) {
    const int n = schedule.node_count();
    const double lambda = mixing_bound_lambda(n, schedule.eta(), schedule.window());
    const double cap = 4.0 * std::log(static_cast<double>(n)) / (1.0 - lambda);
    const double inv_n = 1.0 / static_cast<double>(n);
    WorstCase w;
    std::vector<double> row_sum(n);
    for (long k = 1; k <= k_max; ++k) {
        std::fill(row_sum.begin(), row_sum.end(), 0.0);
        WeightMatrix p = schedule.weights_at(k);
        for (long t = k; t >= 1; --t) {
            if (t < k) p = p * schedule.weights_at(t);
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) s += std::abs(p(i, j) - inv_n);
                row_sum[i] += s;
            }
        }
        for (int i = 0; i < n; ++i)
            w.update(cap - row_sum[i], "k=" + std::to_string(k) + " i=" + std::to_string(i));
    }
    return finish("cumulative mixing envelope", w);
}

BoundCheckResult check_effective_operator_bound(const AcceleratedOperator& op, long k_max) {
    const int n = op.node_count();
    const double lambda = 1.0 - 1.0 / (18.0 * static_cast<double>(op.size_upper_bound));
    const double inv_n = 1.0 / static_cast<double>(n);
    WorstCase w;
    const Eigen::MatrixXd b = op.block_matrix();
    Eigen::MatrixXd bk = b * b;  // k = 2
    for (long k = 2; k <= k_max; ++k) {
        if (k > 2) bk = bk * b;
        const Eigen::MatrixXd eff = bk.topLeftCorner(n, n) + bk.topRightCorner(n, n);
        const double envelope = std::numbers::sqrt2 * std::pow(lambda, static_cast<double>(k));
        double dev = 0.0;
        double row_dev = 0.0;
        for (int i = 0; i < n; ++i) {
            row_dev = std::max(row_dev, std::abs(eff.row(i).sum() - 1.0));
            for (int j = 0; j < n; ++j) dev = std::max(dev, std::abs(eff(i, j) - inv_n));
        }
        w.update(envelope - dev, "k=" + std::to_string(k));
        w.update(1e-10 - row_dev, "row sum drift at k=" + std::to_string(k));
    }
    return finish("momentum operator envelope", w);
}

BoundCheckResult check_consensus_contraction(const AcceleratedOperator& op, const Eigen::VectorXd& x0,
                                             long k_max) {
    const int n = op.node_count();
    if (x0.size() != n) throw std::invalid_argument("initial consensus state dimension mismatch");
    const double rate = 1.0 - 1.0 / (9.0 * static_cast<double>(op.size_upper_bound));
    const double xbar = x0.mean();
    const Eigen::VectorXd target = Eigen::VectorXd::Constant(n, xbar);
    const double base = (x0 - target).squaredNorm();  // y_1 = x_0
    WorstCase w;
    Eigen::VectorXd prev = x0;
    Eigen::VectorXd curr = x0;  // y_1 with y_0 = y_1
    for (long k = 1; k <= k_max; ++k) {
        if (k > 1) {
            Eigen::VectorXd next = accelerated_consensus_step(op, curr, prev);
            prev = curr;
            curr = next;
        }
        const double lhs = (curr - target).squaredNorm();
        const double envelope = 2.0 * std::pow(rate, static_cast<double>(k - 1)) * base;
        w.update(envelope - lhs, "k=" + std::to_string(k));
    }
    return finish("momentum consensus contraction", w);
}

BoundCheckResult check_schedule_stochasticity(const GraphSchedule& schedule, long horizon) {
    WorstCase w;
    bool clean = true;
    std::string first_violation;
    for (long k = 0; k < horizon; ++k) {
        const auto violations = check_weight_matrix(schedule.weights_at(k), schedule.graph_at(k));
        w.cases += 1;
        if (!violations.empty() && clean) {
            clean = false;
            first_violation = "step " + std::to_string(k) + ": " + violations.front();
        }
        // Track the worst row-sum drift as the margin even when passing.
        const auto& a = schedule.weights_at(k);
        for (int i = 0; i < a.rows(); ++i) {
            const double drift =
                std::max(std::abs(a.row(i).sum() - 1.0), std::abs(a.col(i).sum() - 1.0));
            if (1e-12 - drift < w.margin) {
                w.margin = 1e-12 - drift;
                w.detail = "step " + std::to_string(k) + " row/col " + std::to_string(i);
            }
        }
    }
    BoundCheckResult r = finish("schedule stochasticity", w);
    r.passed = clean && r.margin >= 0.0;
    if (!clean) r.detail = first_violation;
    return r;
}

BoundCheckResult check_coverage(const SimulationConfig& config, long runs, double rho, int workers) {
    const MonteCarloSummary summary = monte_carlo(config, runs, rho, workers);
    BoundCheckResult r;
    r.name = "concentration coverage";
    r.cases = runs;
    if (!summary.constants) {
        r.passed = false;
        r.detail = "no concentration certificate applies to this rule/scenario";
        r.margin = -1.0;
        return r;
    }
    if (summary.degenerate_count() > 0) {
        r.passed = false;
        r.detail = std::to_string(summary.degenerate_count()) + " degenerate runs";
        r.margin = -1.0;
        return r;
    }
    const double fraction =
        static_cast<double>(summary.violation_count()) / static_cast<double>(runs);
    r.margin = rho - fraction;
    r.passed = r.margin >= 0.0;
    r.detail = "violation fraction " + std::to_string(fraction) + ", threshold step N(rho)=" +
               std::to_string(summary.constants->threshold_step);
    return r;
}

GraphSchedule family_schedule(const ScheduleFamily& family, int index) {
    const std::uint64_t s = derive_seed(family.seed, static_cast<std::uint64_t>(index));
    const CounterRng rng(s);
    const int n = 2 + static_cast<int>(rng.bits(0, 0, 0) % static_cast<std::uint64_t>(family.n_max - 1));
    const int b = 1 + static_cast<int>(rng.bits(0, 0, 1) % static_cast<std::uint64_t>(family.b_max));
    const int templates = 1 + static_cast<int>(rng.bits(0, 0, 2) % 4);
    auto pool = random_window_pool(n, b, templates, hash_mix(s, 3));
    return GraphSchedule::cycling(std::move(pool), hash_mix(s, 4));
}

namespace {

BoundCheckResult family_sweep(const ScheduleFamily& family, const char* name,
                              BoundCheckResult (*check)(const GraphSchedule&, long)) {
    WorstCase w;
    for (int s = 0; s < family.schedules; ++s) {
        const GraphSchedule schedule = family_schedule(family, s);
        const BoundCheckResult r = check(schedule, family.k_max);
        w.cases += r.cases - 1;  // update() adds one more
        w.update(r.margin, "schedule " + std::to_string(s) + ", " + r.detail);
    }
    return finish(name, w);
}

}  // namespace

BoundCheckResult check_chain_deviation_family(const ScheduleFamily& family) {
    return family_sweep(family, "chain deviation envelope (family)", &check_chain_deviation_bound);
}

BoundCheckResult check_cumulative_mixing_family(const ScheduleFamily& family) {
    return family_sweep(family, "cumulative mixing envelope (family)", &check_cumulative_mixing_bound);
}

}  // namespace nblearn
