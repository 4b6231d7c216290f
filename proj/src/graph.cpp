#include "dra/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dra/rng.hpp"

namespace dra {

std::vector<std::vector<int>> Topology::adjacency() const {
    std::vector<std::vector<int>> adj(nodes);
    for (const auto& [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

int Topology::degree(int node) const {
    int d = 0;
    for (const auto& [i, j] : edges) {
        if (i == node || j == node) ++d;
    }
    return d;
}

void Topology::validate() const {
    if (nodes < 1) throw std::invalid_argument("Topology: at least one node required");
    std::set<std::pair<int, int>> seen;
    for (const auto& [i, j] : edges) {
        if (i < 0 || j < 0 || i >= nodes || j >= nodes)
            throw std::invalid_argument("Topology: edge index out of range");
        if (i == j) throw std::invalid_argument("Topology: self-loop at node " + std::to_string(i));
        auto key = std::minmax(i, j);
        if (!seen.insert(key).second)
            throw std::invalid_argument("Topology: duplicate edge (" + std::to_string(key.first) + ", " +
                                        std::to_string(key.second) + ")");
    }
}

bool is_connected(const Topology& topology) {
    if (topology.nodes <= 1) return true;
    const auto adj = topology.adjacency();
    std::vector<char> seen(topology.nodes, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == topology.nodes;
}

Topology random_regular(int nodes, int degree, std::uint64_t seed) {
    if (nodes < 1) throw std::invalid_argument("random_regular: nodes must be >= 1");
    if (degree < 0 || degree >= nodes)
        throw std::invalid_argument("random_regular: need 0 <= degree < nodes");
    if ((static_cast<long long>(nodes) * degree) % 2 != 0)
        throw std::invalid_argument("random_regular: nodes*degree must be even");

    // Pairing model with collision repair: pair shuffled stubs, then resolve
    // self-loops and duplicates by degree-preserving double-edge swaps.
    // Outright rejection of collided pairings has acceptance probability
    // roughly exp(-(d^2-1)/4), hopeless beyond small degrees.
    for (std::uint64_t salt = 0; salt < 1000; ++salt) {
        SplitMix64 rng = keyed_stream(seed, 0x5247u /* "RG" */, salt);
        std::vector<int> stubs;
        stubs.reserve(static_cast<std::size_t>(nodes) * degree);
        for (int v = 0; v < nodes; ++v)
            for (int d = 0; d < degree; ++d) stubs.push_back(v);
        for (std::size_t i = stubs.size(); i > 1; --i) {
            std::swap(stubs[i - 1], stubs[rng.uniform_int(i)]);
        }
        std::vector<std::pair<int, int>> edges;
        edges.reserve(stubs.size() / 2);
        std::map<std::pair<int, int>, int> count;
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            auto key = std::minmax(stubs[i], stubs[i + 1]);
            edges.push_back(key);
            ++count[key];
        }
        auto is_bad = [&](const std::pair<int, int>& e) { return e.first == e.second || count[e] > 1; };

        bool ok = true;
        for (std::size_t e = 0; e < edges.size() && ok; ++e) {
            if (!is_bad(edges[e])) continue;
            bool repaired = false;
            for (int attempt = 0; attempt < 2000 && !repaired; ++attempt) {
                const std::size_t o = rng.uniform_int(edges.size());
                if (o == e) continue;
                const auto [a, b] = edges[e];
                auto [c, d] = edges[o];
                if (rng.uniform() < 0.5) std::swap(c, d);
                if (a == d || c == b) continue;
                const auto n1 = std::minmax(a, d);
                const auto n2 = std::minmax(c, b);
                if (n1 == n2 || count[n1] > 0 || count[n2] > 0) continue;
                if (--count[edges[e]] == 0) count.erase(edges[e]);
                if (--count[edges[o]] == 0) count.erase(edges[o]);
                ++count[n1];
                ++count[n2];
                edges[e] = n1;
                edges[o] = n2;
                repaired = true;
            }
            ok = repaired;
        }
        if (!ok) continue;

        Topology t;
        t.nodes = nodes;
        t.edges.assign(edges.begin(), edges.end());
        std::sort(t.edges.begin(), t.edges.end());
        if (is_connected(t)) return t;
    }
    throw std::runtime_error("random_regular: no connected simple graph found in 1000 attempts");
}

Topology complete_graph(int nodes) {
    if (nodes < 1) throw std::invalid_argument("complete_graph: nodes must be >= 1");
    Topology t;
    t.nodes = nodes;
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j) t.edges.emplace_back(i, j);
    return t;
}

Topology read_edge_list(std::istream& in, int min_nodes) {
    std::set<std::pair<int, int>> edge_set;
    int max_node = min_nodes - 1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        int i, j;
        if (!(ls >> i)) continue;  // blank line
        if (!(ls >> j))
            throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": expected two indices");
        if (i < 0 || j < 0)
            throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": negative index");
        if (i == j)
            throw std::invalid_argument("edge list line " + std::to_string(line_no) + ": self-loop");
        edge_set.insert(std::minmax(i, j));
        max_node = std::max({max_node, i, j});
    }
    Topology t;
    t.nodes = max_node + 1;
    t.edges.assign(edge_set.begin(), edge_set.end());
    t.validate();
    return t;
}

Topology load_edge_list(const std::string& path, int min_nodes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list file: " + path);
    return read_edge_list(in, min_nodes);
}

void write_edge_list(const Topology& topology, std::ostream& out) {
    for (const auto& [i, j] : topology.edges) out << i << " " << j << "\n";
}

WeightMatrix WeightMatrix::from_rows(int n, std::vector<double> entries) {
    if (n < 1) throw std::invalid_argument("WeightMatrix: n must be >= 1");
    if (entries.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("WeightMatrix: entry count mismatch");
    WeightMatrix W;
    W.n = n;
    W.w = std::move(entries);
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double wij = W.w[static_cast<std::size_t>(i) * n + j];
            if (wij < 0.0) throw std::invalid_argument("WeightMatrix: negative weight");
            row_sum += wij;
        }
        if (std::abs(row_sum - 1.0) > 1e-12)
            throw std::invalid_argument("WeightMatrix: row " + std::to_string(i) + " sums to " +
                                        std::to_string(row_sum) + ", expected 1");
    }
    W.doubly_stochastic = true;
    for (int j = 0; j < n && W.doubly_stochastic; ++j) {
        double col_sum = 0.0;
        for (int i = 0; i < n; ++i) col_sum += W.w[static_cast<std::size_t>(i) * n + j];
        if (std::abs(col_sum - 1.0) > 1e-12) W.doubly_stochastic = false;
    }
    return W;
}

WeightMatrix metropolis_weights(const Topology& topology) {
    if (!is_connected(topology)) throw std::invalid_argument("metropolis_weights: topology must be connected");
    const int n = topology.nodes;
    const auto adj = topology.adjacency();
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j : adj[i]) {
            const double wij = 1.0 / (1.0 + std::max(adj[i].size(), adj[j].size()));
            w[static_cast<std::size_t>(i) * n + j] = wij;
            off += wij;
        }
        w[static_cast<std::size_t>(i) * n + i] = 1.0 - off;
    }
    return WeightMatrix::from_rows(n, std::move(w));
}

WeightMatrix equal_weights(const Topology& topology) {
    const int n = topology.nodes;
    const auto adj = topology.adjacency();
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double share = 1.0 / (1.0 + static_cast<double>(adj[i].size()));
        w[static_cast<std::size_t>(i) * n + i] = share;
        for (int j : adj[i]) w[static_cast<std::size_t>(i) * n + j] = share;
    }
    return WeightMatrix::from_rows(n, std::move(w));
}

namespace {

// Largest eigenvalue of M^T M by power iteration (tolerance 1e-12, at most
// 1e5 iterations). The all-ones start is annihilated by both deviation
// operators below, so a ramp vector is the fallback start.
double spectral_norm_squared(int n, const std::vector<double>& m) {
    const std::size_t N = static_cast<std::size_t>(n);
    auto apply = [&](const std::vector<double>& x, std::vector<double>& mx, std::vector<double>& y) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += m[i * N + j] * x[j];
            mx[i] = acc;
        }
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += m[i * N + j] * mx[i];
            y[j] = acc;
        }
    };

    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> mx(n), y(n);
    apply(x, mx, y);
    double yn = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    if (yn < 1e-280) {
        for (int i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
        double xn = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        for (double& v : x) v /= xn;
        apply(x, mx, y);
        yn = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
        if (yn < 1e-280) return 0.0;
    }

    double eig = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        for (int i = 0; i < n; ++i) x[i] = y[i] / yn;
        apply(x, mx, y);
        const double next = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);  // Rayleigh quotient
        yn = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
        if (std::abs(next - eig) <= 1e-12 * std::max(1.0, std::abs(next))) return next;
        eig = next;
        if (yn < 1e-280) return 0.0;
    }
    return eig;
}

}  // namespace

double kappa(const WeightMatrix& W, KappaVariant variant) {
    if (W.n < 1) throw std::invalid_argument("kappa: empty matrix");
    const int n = W.n;
    const std::size_t N = static_cast<std::size_t>(n);
    std::vector<double> m(N * N);
    if (variant == KappaVariant::full) {
        if (!W.doubly_stochastic)
            throw std::invalid_argument("kappa(full): weight matrix must be doubly stochastic");
        const double mean = 1.0 / n;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) m[i * N + j] = W.w[i * N + j] - mean;
    } else {
        // W - (1/n) 1 1^T W: subtract the column mean from every entry.
        for (std::size_t j = 0; j < N; ++j) {
            double col_mean = 0.0;
            for (std::size_t i = 0; i < N; ++i) col_mean += W.w[i * N + j];
            col_mean /= n;
            for (std::size_t i = 0; i < N; ++i) m[i * N + j] = W.w[i * N + j] - col_mean;
        }
    }
    return spectral_norm_squared(n, m);
}

double chi_squared(const WeightMatrix& E) {
    double acc = 0.0;
    for (int j = 0; j < E.n; ++j) {
        double col = 0.0;
        for (int i = 0; i < E.n; ++i) col += E(i, j);
        const double d = col - 1.0;
        acc += d * d;
    }
    return acc / static_cast<double>(E.n);
}

HonestSubgraph honest_subgraph(const Topology& topology, const std::set<int>& byzantine) {
    HonestSubgraph sub;
    std::vector<int> new_index(topology.nodes, -1);
    for (int v = 0; v < topology.nodes; ++v) {
        if (byzantine.count(v) == 0) {
            new_index[v] = static_cast<int>(sub.original_ids.size());
            sub.original_ids.push_back(v);
        }
    }
    if (sub.original_ids.empty()) throw std::invalid_argument("honest_subgraph: all nodes Byzantine");
    sub.topology.nodes = static_cast<int>(sub.original_ids.size());
    for (const auto& [i, j] : topology.edges) {
        if (new_index[i] >= 0 && new_index[j] >= 0)
            sub.topology.edges.emplace_back(new_index[i], new_index[j]);
    }
    return sub;
}

}  // namespace dra
