#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "sbdc/errors.hpp"

namespace sbdc::graph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Undirected edge with 1-based endpoints, stored normalized so u < v.
struct Edge {
    int u = 0;
    int v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(int a, int b) {
    if (a == b)
        throw ValidationError("edge endpoints must differ, got (" + std::to_string(a) + ", " +
                              std::to_string(b) + ")");
    return a < b ? Edge{a, b} : Edge{b, a};
}

inline std::string edge_label(const Edge& e) {
    return std::to_string(e.u) + "-" + std::to_string(e.v);
}

struct WeightedEdge {
    int u = 0;
    int v = 0;
    double w = 0.0;
};

// Connected weighted undirected graph; edges kept in canonical
// lexicographic order with strictly positive weights.
struct Graph {
    int n = 0;
    std::vector<Edge> edges;
    Vector weights;

    int m() const { return static_cast<int>(edges.size()); }

    int edge_index(const Edge& e) const {
        auto it = std::lower_bound(edges.begin(), edges.end(), e);
        if (it == edges.end() || *it != e)
            throw UnknownEdge("edge " + edge_label(e) + " is not in the graph");
        return static_cast<int>(it - edges.begin());
    }

    bool has_edge(const Edge& e) const {
        return std::binary_search(edges.begin(), edges.end(), e);
    }
};

namespace detail {

inline bool connected(int n, const std::vector<Edge>& edges) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = n;
    for (const auto& e : edges) {
        int a = find(e.u - 1);
        int b = find(e.v - 1);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

}  // namespace detail

inline Graph build_graph(int n, const std::vector<WeightedEdge>& weighted_edges) {
    if (n < 2) throw ValidationError("vertex count must be at least 2, got " + std::to_string(n));
    std::vector<std::pair<Edge, double>> items;
    items.reserve(weighted_edges.size());
    for (const auto& we : weighted_edges) {
        if (we.u < 1 || we.u > n || we.v < 1 || we.v > n)
            throw ValidationError("edge (" + std::to_string(we.u) + ", " + std::to_string(we.v) +
                                  ") has an endpoint outside 1.." + std::to_string(n));
        Edge e = make_edge(we.u, we.v);
        if (!(we.w > 0.0))
            throw NonPositiveWeight("weight of edge " + edge_label(e) + " must be positive, got " +
                                    std::to_string(we.w));
        items.emplace_back(e, we.w);
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 1; k < items.size(); ++k)
        if (items[k].first == items[k - 1].first)
            throw DuplicateEdge("duplicate edge " + edge_label(items[k].first));

    Graph g;
    g.n = n;
    g.edges.reserve(items.size());
    g.weights.resize(static_cast<Eigen::Index>(items.size()));
    for (std::size_t k = 0; k < items.size(); ++k) {
        g.edges.push_back(items[k].first);
        g.weights(static_cast<Eigen::Index>(k)) = items[k].second;
    }
    if (!detail::connected(n, g.edges)) throw DisconnectedGraph("graph is not connected");
    return g;
}

// Column k of E carries -1 at the lower endpoint of edge k and +1 at the upper one.
inline Matrix incidence_matrix(const Graph& g) {
    Matrix e = Matrix::Zero(g.n, g.m());
    for (int k = 0; k < g.m(); ++k) {
        e(g.edges[k].u - 1, k) = -1.0;
        e(g.edges[k].v - 1, k) = 1.0;
    }
    return e;
}

// L = E W E^T for an arbitrary weight vector; separate weights support the
// perturbed Laplacians used downstream, where entries may be negative.
inline Matrix laplacian(const Graph& g, const Vector& weights) {
    if (weights.size() != g.m())
        throw ValidationError("weight vector length " + std::to_string(weights.size()) +
                              " does not match edge count " + std::to_string(g.m()));
    Matrix l = Matrix::Zero(g.n, g.n);
    for (int k = 0; k < g.m(); ++k) {
        int i = g.edges[k].u - 1;
        int j = g.edges[k].v - 1;
        double w = weights(k);
        l(i, i) += w;
        l(j, j) += w;
        l(i, j) -= w;
        l(j, i) -= w;
    }
    return l;
}

inline Matrix laplacian(const Graph& g) { return laplacian(g, g.weights); }

struct TreePartition {
    std::vector<int> tree_edges;   // ascending canonical indices, size n-1
    std::vector<int> chord_edges;  // ascending canonical indices
    std::vector<int> permutation;  // tree edges first, then chords
};

// Breadth-first spanning tree rooted at node 1, scanning incident edges in
// canonical order; on a tree the permutation is the identity.
inline TreePartition spanning_tree_partition(const Graph& g) {
    std::vector<std::vector<std::pair<int, int>>> adj(g.n);  // (edge index, neighbor row)
    for (int k = 0; k < g.m(); ++k) {
        int i = g.edges[k].u - 1;
        int j = g.edges[k].v - 1;
        adj[i].emplace_back(k, j);
        adj[j].emplace_back(k, i);
    }
    std::vector<bool> seen(g.n, false);
    std::vector<int> queue;
    queue.reserve(g.n);
    queue.push_back(0);
    seen[0] = true;
    std::vector<bool> in_tree(g.m(), false);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int v = queue[head];
        for (const auto& [k, other] : adj[v]) {
            if (!seen[other]) {
                seen[other] = true;
                in_tree[k] = true;
                queue.push_back(other);
            }
        }
    }
    TreePartition part;
    for (int k = 0; k < g.m(); ++k) (in_tree[k] ? part.tree_edges : part.chord_edges).push_back(k);
    part.permutation = part.tree_edges;
    part.permutation.insert(part.permutation.end(), part.chord_edges.begin(),
                            part.chord_edges.end());
    return part;
}

// R = [I_tau T] in the permuted edge order, T = (E_T^T E_T)^{-1} E_T^T E_C.
inline Matrix cutset_matrix(const Graph& g, const TreePartition& part) {
    int tau = g.n - 1;
    if (static_cast<int>(part.tree_edges.size()) != tau ||
        static_cast<int>(part.permutation.size()) != g.m())
        throw ValidationError("tree partition does not match the graph");
    Matrix e = incidence_matrix(g);
    Matrix et(g.n, tau);
    for (int c = 0; c < tau; ++c) et.col(c) = e.col(part.tree_edges[c]);
    int nc = g.m() - tau;
    Matrix r(tau, g.m());
    r.leftCols(tau) = Matrix::Identity(tau, tau);
    if (nc > 0) {
        Matrix ec(g.n, nc);
        for (int c = 0; c < nc; ++c) ec.col(c) = e.col(part.chord_edges[c]);
        Eigen::LLT<Matrix> llt(et.transpose() * et);
        if (llt.info() != Eigen::Success)
            throw SingularTreeGram("tree edge Gram matrix is not positive definite");
        r.rightCols(nc) = llt.solve(et.transpose() * ec);
    }
    return r;
}

struct EdgeSelector {
    std::vector<int> support;  // ascending canonical edge indices
    Matrix P;                  // m x |support|, one 1 per column
};

inline EdgeSelector edge_selector(const Graph& g, const std::vector<Edge>& attacked) {
    if (attacked.empty()) throw EmptyAttackSet("attacked edge set is empty");
    std::vector<int> support;
    support.reserve(attacked.size());
    for (const auto& e : attacked) support.push_back(g.edge_index(make_edge(e.u, e.v)));
    std::sort(support.begin(), support.end());
    for (std::size_t k = 1; k < support.size(); ++k)
        if (support[k] == support[k - 1])
            throw DuplicateEdge("attacked edge " + edge_label(g.edges[support[k]]) +
                                " listed twice");
    EdgeSelector sel;
    sel.P = Matrix::Zero(g.m(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t c = 0; c < support.size(); ++c) sel.P(support[c], static_cast<int>(c)) = 1.0;
    sel.support = std::move(support);
    return sel;
}

struct WeightedDegrees {
    Vector degrees;       // per-node sum of absolute incident weights
    double psi = 0.0;     // maximum weighted degree
    int argmax_node = 0;  // 1-based, smallest index attaining psi
};

inline WeightedDegrees weighted_degrees(const Graph& g) {
    WeightedDegrees wd;
    wd.degrees = Vector::Zero(g.n);
    for (int k = 0; k < g.m(); ++k) {
        double w = std::abs(g.weights(k));
        wd.degrees(g.edges[k].u - 1) += w;
        wd.degrees(g.edges[k].v - 1) += w;
    }
    wd.psi = wd.degrees(0);
    wd.argmax_node = 1;
    for (int i = 1; i < g.n; ++i) {
        if (wd.degrees(i) > wd.psi) {
            wd.psi = wd.degrees(i);
            wd.argmax_node = i + 1;
        }
    }
    return wd;
}

}  // namespace sbdc::graph
