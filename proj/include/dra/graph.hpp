#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <utility>
#include <vector>

namespace dra {

// Undirected simple graph on nodes 0..nodes-1. Edges are stored as ordered
// pairs (i < j) without duplicates.
struct Topology {
    int nodes = 0;
    std::vector<std::pair<int, int>> edges;

    std::vector<std::vector<int>> adjacency() const;  // sorted neighbor lists
    int degree(int node) const;
    void validate() const;
};

bool is_connected(const Topology& topology);

// Connected degree-regular graph from the pairing model; deterministic for a
// fixed (nodes, degree, seed). Retries with an incremented internal salt and
// fails after 1000 attempts.
Topology random_regular(int nodes, int degree, std::uint64_t seed);

Topology complete_graph(int nodes);

// Edge-list text format: one "i j" pair per line, 0-indexed. Node count is
// max index + 1 unless a larger count is given.
Topology read_edge_list(std::istream& in, int min_nodes = 0);
Topology load_edge_list(const std::string& path, int min_nodes = 0);
void write_edge_list(const Topology& topology, std::ostream& out);

// Dense row-stochastic mixing matrix. Rows must sum to 1 within 1e-12; the
// doubly_stochastic flag is set iff columns do too.
struct WeightMatrix {
    int n = 0;
    std::vector<double> w;  // row-major n*n
    bool doubly_stochastic = false;

    double operator()(int i, int j) const { return w[static_cast<std::size_t>(i) * n + j]; }
    static WeightMatrix from_rows(int n, std::vector<double> entries);
};

// w[i][j] = 1/(1 + max(deg_i, deg_j)) on edges, diagonal takes the slack.
// Symmetric, hence doubly stochastic. Requires a connected topology.
WeightMatrix metropolis_weights(const Topology& topology);

// Each row spreads 1/(deg_i + 1) over the node itself and its neighbors.
// Doubly stochastic only when all degrees are equal.
WeightMatrix equal_weights(const Topology& topology);

enum class KappaVariant { full, honest };

// Squared spectral norm of the mixing deviation operator:
//   full:   ||W - (1/n) 1 1^T||^2        (W must be doubly stochastic)
//   honest: ||W - (1/n) 1 1^T W||^2      (W row stochastic)
double kappa(const WeightMatrix& W, KappaVariant variant);

// (1/n) * || column sums - 1 ||^2; zero iff doubly stochastic.
double chi_squared(const WeightMatrix& E);

struct HonestSubgraph {
    Topology topology;              // reindexed to 0..H-1
    std::vector<int> original_ids;  // new index -> original id
};

// Induced subgraph on the non-Byzantine nodes. Connectivity is the caller's
// concern (check with is_connected).
HonestSubgraph honest_subgraph(const Topology& topology, const std::set<int>& byzantine);

}  // namespace dra
