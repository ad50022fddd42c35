#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nblearn {

// Simple undirected graph on nodes 0..n-1. Edges connect distinct nodes and
// are stored once with i < j; self-loops are implicit in the weight rules.
struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    static Graph path(int n);
    static Graph cycle(int n);
    static Graph complete(int n);
    static Graph grid(int side);  // side*side nodes, 4-neighbor lattice
    static Graph from_edges(int n, std::vector<std::pair<int, int>> edges);
    static Graph union_of(const std::vector<Graph>& graphs);

    std::vector<int> degrees() const;
    std::vector<std::vector<int>> adjacency() const;
    bool connected() const;
    bool has_edge(int i, int j) const;
};

// Dense consensus weight matrix paired with the graph it lives on.
using WeightMatrix = Eigen::MatrixXd;

// Checks a candidate weight matrix against a graph: row and column sums 1
// within 1e-12, non-negative entries, positive diagonal, zeros off the edge
// set, and (optionally) every positive entry >= eta. Returns one message per
// violation.
std::vector<std::string> check_weight_matrix(const WeightMatrix& a, const Graph& g, double eta = 0.0);

// Metropolis rule: off-diagonal entries 1/max(deg(i)+1, deg(j)+1) on edges,
// diagonal absorbs the residual. Symmetric, hence doubly stochastic.
WeightMatrix metropolis_weights(const Graph& g);

// Lazy Metropolis rule: I/2 + M/2 with M the Metropolis matrix. Diagonal is
// at least 1/2.
WeightMatrix lazy_metropolis_weights(const Graph& g);

enum class WeightRule { Metropolis, LazyMetropolis };

// Sequence of (graph, weight matrix) pairs indexed by step. Static schedules
// repeat one pair; time-varying schedules cycle through a pool of window
// templates (each template is `window` consecutive graphs whose union is
// connected), the template for each window chosen by a seeded counter hash.
class GraphSchedule {
public:
    static GraphSchedule fixed(Graph g, WeightRule rule = WeightRule::LazyMetropolis);
    static GraphSchedule fixed_custom(Graph g, WeightMatrix a);
    // pool[t] is one window template of exactly `B` graphs on the same node
    // set; requires every template union to be connected.
    static GraphSchedule cycling(std::vector<std::vector<Graph>> pool, std::uint64_t seed,
                                 WeightRule rule = WeightRule::LazyMetropolis);

    int node_count() const noexcept { return n_; }
    int window() const noexcept { return window_; }
    bool is_static() const noexcept { return pool_graphs_.size() == 1 && pool_graphs_[0].size() == 1; }

    const Graph& graph_at(long k) const;
    const WeightMatrix& weights_at(long k) const;

    // Smallest positive entry over every matrix the schedule can emit.
    double eta() const noexcept { return eta_; }

private:
    GraphSchedule() = default;
    std::size_t template_index(long k) const;

    int n_ = 0;
    int window_ = 1;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<Graph>> pool_graphs_;
    std::vector<std::vector<WeightMatrix>> pool_weights_;
    double eta_ = 0.0;
};

// True when, over [k0, k0+horizon) with horizon a positive multiple of the
// schedule window B, the union of every aligned window of B consecutive
// graphs is connected.
bool check_b_strong_connectivity(const GraphSchedule& schedule, long k0, long horizon);

// Ordered product A_k * A_{k-1} * ... * A_t of schedule matrices; requires
// t <= k. Recomputes from scratch; use ProductChainAccumulator to advance a
// chain one step at a time.
WeightMatrix product_chain(const GraphSchedule& schedule, long t, long k);

// Maintains A_k:t for fixed t while k advances, one multiply per step.
class ProductChainAccumulator {
public:
    ProductChainAccumulator(const GraphSchedule& schedule, long t);
    void advance();  // left-multiplies the next schedule matrix
    long start() const noexcept { return t_; }
    long current() const noexcept { return k_; }
    const WeightMatrix& value() const noexcept { return value_; }

private:
    const GraphSchedule* schedule_;
    long t_;
    long k_;
    WeightMatrix value_;
};

// Geometric mixing rate (1 - eta/(4 n^2))^(1/B) of a doubly stochastic
// B-strongly-connected schedule with positive entries >= eta.
double mixing_bound_lambda(int n, double eta, int window_b);

// sum_{t=1..k} sum_j |[A_{k:t}]_{ij} - 1/n| for row i.
double cumulative_mixing_sum(const GraphSchedule& schedule, long k, int i);

// Momentum consensus operator on a fixed connected graph: lazy Metropolis
// matrix plus extrapolation weight sigma = 1 - 2/(9U+1), U >= n an upper
// bound on the network size known to the nodes.
struct AcceleratedOperator {
    Graph graph;
    WeightMatrix a_bar;  // lazy Metropolis weights of `graph`
    int size_upper_bound = 0;
    double sigma = 0.0;

    static AcceleratedOperator build(const Graph& g, int size_upper_bound);

    int node_count() const noexcept { return graph.n; }
    // 2n x 2n one-step matrix [[(1+sigma) A, -sigma A], [I, 0]].
    Eigen::MatrixXd block_matrix() const;
};

// One momentum consensus step: A (y_curr + sigma (y_curr - y_prev)).
Eigen::VectorXd accelerated_consensus_step(const AcceleratedOperator& op, const Eigen::VectorXd& y_curr,
                                           const Eigen::VectorXd& y_prev);

// Upper-left-to-full contraction [I 0] B^k [I I]^T of the block matrix; rows
// sum to one for k >= 2 (throws std::invalid_argument for smaller k).
Eigen::MatrixXd effective_operator(const AcceleratedOperator& op, long k);

// Random connected graph utilities (seeded, deterministic).

// Geometric graph: nodes at the given positions, edges between pairs within
// `radius`. If the result is disconnected, the shortest inter-component pairs
// are bridged until it is connected.
Graph geometric_graph(const std::vector<std::pair<double, double>>& positions, double radius);

// Pool of window templates for time-varying schedules: each template is
// `window_b` graphs on n nodes whose union is connected (a random spanning
// tree plus extra edges, sliced across the window).
std::vector<std::vector<Graph>> random_window_pool(int n, int window_b, int templates,
                                                   std::uint64_t seed);

// Pool whose per-template union is exactly `g`: g's edge set is dealt across
// the `window_b` slots, independently per template. Requires g connected so
// every window union is connected.
std::vector<std::vector<Graph>> window_pool_from_graph(const Graph& g, int window_b, int templates,
                                                       std::uint64_t seed);

}  // namespace nblearn
