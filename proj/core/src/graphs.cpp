#include "nblearn/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "nblearn/rng.hpp"

namespace nblearn {

namespace {

constexpr double kStochTol = 1e-12;

void require_node_count(int n) {
    if (n < 1) throw std::invalid_argument("graph needs at least one node");
}

}  // namespace

Graph Graph::path(int n) {
    require_node_count(n);
    Graph g{n, {}};
    for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
    return g;
}

Graph Graph::cycle(int n) {
    require_node_count(n);
    if (n < 3) return path(n);  // a 2-cycle would duplicate the edge
    Graph g = path(n);
    g.edges.emplace_back(0, n - 1);
    return g;
}

Graph Graph::complete(int n) {
    require_node_count(n);
    Graph g{n, {}};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
    return g;
}

Graph Graph::grid(int side) {
    if (side < 1) throw std::invalid_argument("grid side must be positive");
    Graph g{side * side, {}};
    auto id = [side](int r, int c) { return r * side + c; };
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            if (c + 1 < side) g.edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < side) g.edges.emplace_back(id(r, c), id(r + 1, c));
        }
    }
    return g;
}

Graph Graph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
    require_node_count(n);
    std::set<std::pair<int, int>> seen;
    for (auto& [i, j] : edges) {
        if (i == j) throw std::invalid_argument("explicit self-loop in edge list");
        if (i > j) std::swap(i, j);
        if (i < 0 || j >= n) throw std::invalid_argument("edge endpoint outside node range");
        if (!seen.insert({i, j}).second) throw std::invalid_argument("duplicate edge in edge list");
    }
    std::sort(edges.begin(), edges.end());
    return Graph{n, std::move(edges)};
}

Graph Graph::union_of(const std::vector<Graph>& graphs) {
    if (graphs.empty()) throw std::invalid_argument("union of zero graphs");
    const int n = graphs.front().n;
    std::set<std::pair<int, int>> all;
    for (const auto& g : graphs) {
        if (g.n != n) throw std::invalid_argument("graph union requires a common node set");
        all.insert(g.edges.begin(), g.edges.end());
    }
    Graph out{n, {all.begin(), all.end()}};
    return out;
}

std::vector<int> Graph::degrees() const {
    std::vector<int> d(n, 0);
    for (const auto& [i, j] : edges) {
        ++d[i];
        ++d[j];
    }
    return d;
}

std::vector<std::vector<int>> Graph::adjacency() const {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    return adj;
}

bool Graph::connected() const {
    if (n <= 1) return true;
    const auto adj = adjacency();
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n;
}

bool Graph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::find(edges.begin(), edges.end(), std::make_pair(i, j)) != edges.end();
}

std::vector<std::string> check_weight_matrix(const WeightMatrix& a, const Graph& g, double eta) {
    std::vector<std::string> out;
    if (a.rows() != g.n || a.cols() != g.n) {
        out.push_back("weight matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                      ", expected " + std::to_string(g.n) + "x" + std::to_string(g.n));
        return out;
    }
    for (int i = 0; i < g.n; ++i) {
        const double rs = a.row(i).sum();
        if (std::abs(rs - 1.0) > kStochTol)
            out.push_back("row " + std::to_string(i) + " sums to " + std::to_string(rs));
        const double cs = a.col(i).sum();
        if (std::abs(cs - 1.0) > kStochTol)
            out.push_back("column " + std::to_string(i) + " sums to " + std::to_string(cs));
        if (!(a(i, i) > 0.0)) out.push_back("diagonal entry " + std::to_string(i) + " is not positive");
    }
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            const double v = a(i, j);
            if (v < 0.0) {
                out.push_back("negative entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            } else if (v > 0.0) {
                if (i != j && !g.has_edge(i, j))
                    out.push_back("positive entry at (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") off the edge set");
                if (eta > 0.0 && v < eta)
                    out.push_back("entry at (" + std::to_string(i) + "," + std::to_string(j) + ") = " +
                                  std::to_string(v) + " below floor " + std::to_string(eta));
            }
        }
    }
    return out;
}

WeightMatrix metropolis_weights(const Graph& g) {
    const auto deg = g.degrees();
    WeightMatrix a = WeightMatrix::Zero(g.n, g.n);
    for (const auto& [i, j] : g.edges) {
        const double w = 1.0 / static_cast<double>(std::max(deg[i], deg[j]) + 1);
        a(i, j) = w;
        a(j, i) = w;
    }
    for (int i = 0; i < g.n; ++i) a(i, i) = 1.0 - a.row(i).sum();
    return a;
}

WeightMatrix lazy_metropolis_weights(const Graph& g) {
    WeightMatrix a = 0.5 * metropolis_weights(g);
    for (int i = 0; i < g.n; ++i) a(i, i) += 0.5;
    return a;
}

namespace {

WeightMatrix weights_for(const Graph& g, WeightRule rule) {
    return rule == WeightRule::Metropolis ? metropolis_weights(g) : lazy_metropolis_weights(g);
}

double min_positive_entry(const WeightMatrix& a) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (a(i, j) > 0.0) m = std::min(m, a(i, j));
    return m;
}

}  // namespace

GraphSchedule GraphSchedule::fixed(Graph g, WeightRule rule) {
    WeightMatrix a = weights_for(g, rule);
    return fixed_custom(std::move(g), std::move(a));
}

GraphSchedule GraphSchedule::fixed_custom(Graph g, WeightMatrix a) {
    if (a.rows() != g.n || a.cols() != g.n)
        throw std::invalid_argument("custom weight matrix dimension mismatch");
    GraphSchedule s;
    s.n_ = g.n;
    s.window_ = 1;
    s.pool_graphs_.push_back({std::move(g)});
    s.pool_weights_.push_back({std::move(a)});
    s.eta_ = min_positive_entry(s.pool_weights_[0][0]);
    return s;
}

GraphSchedule GraphSchedule::cycling(std::vector<std::vector<Graph>> pool, std::uint64_t seed,
                                     WeightRule rule) {
    if (pool.empty()) throw std::invalid_argument("schedule template pool is empty");
    const int window = static_cast<int>(pool.front().size());
    if (window < 1) throw std::invalid_argument("schedule window must be positive");
    const int n = pool.front().front().n;
    GraphSchedule s;
    s.n_ = n;
    s.window_ = window;
    s.seed_ = seed;
    s.eta_ = std::numeric_limits<double>::infinity();
    for (auto& tmpl : pool) {
        if (static_cast<int>(tmpl.size()) != window)
            throw std::invalid_argument("all schedule templates must span the same window");
        std::vector<WeightMatrix> ws;
        for (const auto& g : tmpl) {
            if (g.n != n) throw std::invalid_argument("schedule templates must share the node set");
            ws.push_back(weights_for(g, rule));
            s.eta_ = std::min(s.eta_, min_positive_entry(ws.back()));
        }
        if (!Graph::union_of(tmpl).connected())
            throw std::invalid_argument("schedule template union is not connected");
        s.pool_graphs_.push_back(std::move(tmpl));
        s.pool_weights_.push_back(std::move(ws));
    }
    return s;
}

std::size_t GraphSchedule::template_index(long k) const {
    if (pool_graphs_.size() == 1) return 0;
    const std::uint64_t w = static_cast<std::uint64_t>(k / window_);
    return static_cast<std::size_t>(hash_mix(seed_, w) % pool_graphs_.size());
}

const Graph& GraphSchedule::graph_at(long k) const {
    if (k < 0) throw std::invalid_argument("schedule index must be non-negative");
    return pool_graphs_[template_index(k)][static_cast<std::size_t>(k % window_)];
}

const WeightMatrix& GraphSchedule::weights_at(long k) const {
    if (k < 0) throw std::invalid_argument("schedule index must be non-negative");
    return pool_weights_[template_index(k)][static_cast<std::size_t>(k % window_)];
}

bool check_b_strong_connectivity(const GraphSchedule& schedule, long k0, long horizon) {
    const int b = schedule.window();
    if (k0 < 0 || horizon <= 0 || horizon % b != 0)
        throw std::invalid_argument("horizon must be a positive multiple of the schedule window");
    for (long w = 0; w < horizon / b; ++w) {
        std::vector<Graph> slice;
        slice.reserve(b);
        for (long s = 0; s < b; ++s) slice.push_back(schedule.graph_at(k0 + w * b + s));
        if (!Graph::union_of(slice).connected()) return false;
    }
    return true;
}

WeightMatrix product_chain(const GraphSchedule& schedule, long t, long k) {
    if (t < 0 || k < t) throw std::invalid_argument("product chain needs 0 <= t <= k");
    WeightMatrix p = schedule.weights_at(t);
    for (long s = t + 1; s <= k; ++s) p = schedule.weights_at(s) * p;
    return p;
}

ProductChainAccumulator::ProductChainAccumulator(const GraphSchedule& schedule, long t)
    : schedule_(&schedule), t_(t), k_(t), value_(schedule.weights_at(t)) {
    if (t < 0) throw std::invalid_argument("product chain needs t >= 0");
}

void ProductChainAccumulator::advance() {
    ++k_;
    value_ = schedule_->weights_at(k_) * value_;
}

double mixing_bound_lambda(int n, double eta, int window_b) {
    if (n < 1) throw std::invalid_argument("mixing bound needs n >= 1");
    if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("mixing bound needs eta in (0,1]");
    if (window_b < 1) throw std::invalid_argument("mixing bound needs B >= 1");
    const double base = 1.0 - eta / (4.0 * static_cast<double>(n) * static_cast<double>(n));
    return std::pow(base, 1.0 / static_cast<double>(window_b));
}

double cumulative_mixing_sum(const GraphSchedule& schedule, long k, int i) {
    if (k < 1) throw std::invalid_argument("cumulative mixing sum needs k >= 1");
    if (i < 0 || i >= schedule.node_count()) throw std::invalid_argument("row index out of range");
    const int n = schedule.node_count();
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    // Accumulate A_{k:t} backwards: right-multiplying by A_{t-1} turns the
    // chain started at t into the chain started at t-1.
    WeightMatrix p = schedule.weights_at(k);
    for (long t = k; t >= 1; --t) {
        if (t < k) p = p * schedule.weights_at(t);
        for (int j = 0; j < n; ++j) total += std::abs(p(i, j) - inv_n);
    }
    return total;
}

AcceleratedOperator AcceleratedOperator::build(const Graph& g, int size_upper_bound) {
    if (!g.connected()) throw std::invalid_argument("momentum consensus needs a connected graph");
    if (size_upper_bound < g.n)
        throw std::invalid_argument("size upper bound must be at least the node count");
    AcceleratedOperator op;
    op.graph = g;
    op.a_bar = lazy_metropolis_weights(g);
    op.size_upper_bound = size_upper_bound;
    op.sigma = 1.0 - 2.0 / (9.0 * static_cast<double>(size_upper_bound) + 1.0);
    return op;
}

Eigen::MatrixXd AcceleratedOperator::block_matrix() const {
    const int n = graph.n;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    b.topLeftCorner(n, n) = (1.0 + sigma) * a_bar;
    b.topRightCorner(n, n) = -sigma * a_bar;
    b.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    return b;
}

Eigen::VectorXd accelerated_consensus_step(const AcceleratedOperator& op, const Eigen::VectorXd& y_curr,
                                           const Eigen::VectorXd& y_prev) {
    if (y_curr.size() != op.graph.n || y_prev.size() != op.graph.n)
        throw std::invalid_argument("consensus state dimension mismatch");
    return op.a_bar * (y_curr + op.sigma * (y_curr - y_prev));
}

Eigen::MatrixXd effective_operator(const AcceleratedOperator& op, long k) {
    if (k < 2) throw std::invalid_argument("effective operator is defined for k >= 2");
    const int n = op.graph.n;
    Eigen::MatrixXd bk = op.block_matrix();
    Eigen::MatrixXd b = bk;
    for (long s = 1; s < k; ++s) bk = bk * b;
    // [I 0] B^k [I I]^T = top-left block + top-right block.
    return bk.topLeftCorner(n, n) + bk.topRightCorner(n, n);
}

Graph geometric_graph(const std::vector<std::pair<double, double>>& positions, double radius) {
    const int n = static_cast<int>(positions.size());
    require_node_count(n);
    if (!(radius > 0.0)) throw std::invalid_argument("geometric graph needs a positive radius");
    auto dist2 = [&](int i, int j) {
        const double dx = positions[i].first - positions[j].first;
        const double dy = positions[i].second - positions[j].second;
        return dx * dx + dy * dy;
    };
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist2(i, j) <= radius * radius) edges.emplace_back(i, j);
    Graph g = Graph::from_edges(n, std::move(edges));
    // Bridge components through their closest pairs until connected.
    while (!g.connected()) {
        const auto adj = g.adjacency();
        std::vector<int> comp(n, -1);
        int ncomp = 0;
        for (int start = 0; start < n; ++start) {
            if (comp[start] >= 0) continue;
            std::vector<int> stack{start};
            comp[start] = ncomp;
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                for (int w : adj[v])
                    if (comp[w] < 0) {
                        comp[w] = ncomp;
                        stack.push_back(w);
                    }
            }
            ++ncomp;
        }
        double best = std::numeric_limits<double>::infinity();
        std::pair<int, int> pick{-1, -1};
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (comp[i] != comp[j] && dist2(i, j) < best) {
                    best = dist2(i, j);
                    pick = {i, j};
                }
        g.edges.push_back(pick);
        std::sort(g.edges.begin(), g.edges.end());
    }
    return g;
}

std::vector<std::vector<Graph>> random_window_pool(int n, int window_b, int templates,
                                                   std::uint64_t seed) {
    require_node_count(n);
    if (window_b < 1 || templates < 1)
        throw std::invalid_argument("window pool needs positive window and template count");
    CounterRng rng(seed);
    std::vector<std::vector<Graph>> pool;
    pool.reserve(templates);
    for (int t = 0; t < templates; ++t) {
        // Random spanning tree: attach each node to a random earlier node.
        std::vector<std::pair<int, int>> edges;
        for (int v = 1; v < n; ++v) {
            const int u = static_cast<int>(rng.bits(t, v, 0) % static_cast<std::uint64_t>(v));
            edges.emplace_back(u, v);
        }
        // A few extra edges to vary degrees.
        const int extra = n > 2 ? static_cast<int>(rng.bits(t, 0, 1) % static_cast<std::uint64_t>(n)) : 0;
        std::set<std::pair<int, int>> have(edges.begin(), edges.end());
        for (int e = 0; e < extra; ++e) {
            int i = static_cast<int>(rng.bits(t, e, 2) % static_cast<std::uint64_t>(n));
            int j = static_cast<int>(rng.bits(t, e, 3) % static_cast<std::uint64_t>(n));
            if (i == j) continue;
            if (i > j) std::swap(i, j);
            if (have.insert({i, j}).second) edges.emplace_back(i, j);
        }
        // Deal the union's edges across the window; empty slices are fine
        // (they contribute the identity matrix).
        std::vector<std::vector<std::pair<int, int>>> slices(window_b);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const int slot = static_cast<int>(rng.bits(t, e, 4) % static_cast<std::uint64_t>(window_b));
            slices[slot].push_back(edges[e]);
        }
        std::vector<Graph> tmpl;
        tmpl.reserve(window_b);
        for (auto& sl : slices) tmpl.push_back(Graph::from_edges(n, std::move(sl)));
        pool.push_back(std::move(tmpl));
    }
    return pool;
}

std::vector<std::vector<Graph>> window_pool_from_graph(const Graph& g, int window_b, int templates,
                                                       std::uint64_t seed) {
    if (window_b < 1 || templates < 1)
        throw std::invalid_argument("window pool needs positive window and template count");
    if (!g.connected()) throw std::invalid_argument("window pool base graph must be connected");
    CounterRng rng(seed);
    std::vector<std::vector<Graph>> pool;
    pool.reserve(templates);
    for (int t = 0; t < templates; ++t) {
        std::vector<std::vector<std::pair<int, int>>> slices(window_b);
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            const int slot = static_cast<int>(rng.bits(t, e, 0) % static_cast<std::uint64_t>(window_b));
            slices[slot].push_back(g.edges[e]);
        }
        std::vector<Graph> tmpl;
        tmpl.reserve(window_b);
        for (auto& sl : slices) tmpl.push_back(Graph::from_edges(g.n, std::move(sl)));
        pool.push_back(std::move(tmpl));
    }
    return pool;
}

}  // namespace nblearn
