#pragma once

// Test-side oracles, kept independent of the library's computation routes:
// connectivity by union-find, effective resistance through the Laplacian
// pseudoinverse, and closed forms for the built-in decoding family.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "sbdc/graph.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline int component_count(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = n;
    for (const auto& [a, b] : edges) {
        int ra = find(a - 1);
        int rb = find(b - 1);
        if (ra != rb) {
            parent[ra] = rb;
            --components;
        }
    }
    return components;
}

inline MatrixXd pinv_psd(const MatrixXd& a, double rel_tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    VectorXd ev = es.eigenvalues();
    double cutoff = rel_tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
    VectorXd inv = VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cutoff) inv(i) = 1.0 / ev(i);
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// Gram matrix of the attacked incidence columns in the weighted cut space,
// computed as E_A^T L^+ E_A; the library uses the cut-set route instead.
inline MatrixXd resistance_gram(const MatrixXd& incidence, const VectorXd& weights,
                                const std::vector<int>& attacked) {
    MatrixXd lap = incidence * weights.asDiagonal() * incidence.transpose();
    MatrixXd lplus = pinv_psd(lap);
    MatrixXd ea(incidence.rows(), static_cast<Eigen::Index>(attacked.size()));
    for (std::size_t c = 0; c < attacked.size(); ++c) ea.col(static_cast<Eigen::Index>(c)) = incidence.col(attacked[c]);
    return ea.transpose() * lplus * ea;
}

inline double spectral_norm_sym(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (a + a.transpose()));
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline VectorXd sym_eigenvalues(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (a + a.transpose()));
    return es.eigenvalues();
}

// Closed forms for the built-in decoding family.
inline double paper_eval(double k, double eta) {
    if (eta < 0.0) return k * eta;
    if (eta < 3.0) return k * (eta - 2.0 / 13.0 * eta * eta);
    return k * (4.0 / 13.0 * std::sqrt(eta + 1.0) + 1.0);
}

// Smallest preimage on the increasing region, by branch inversion.
inline double paper_theta(double k, double w) {
    if (w < 0.0) return w / k;
    if (w < k * (21.0 / 13.0)) return 3.25 * (1.0 - std::sqrt(1.0 - 8.0 * w / (13.0 * k)));
    double s = 13.0 * (w / k - 1.0) / 4.0;
    return s * s - 1.0;
}

inline sbdc::graph::Graph random_tree(std::mt19937_64& rng, int n, double wlo, double whi) {
    std::vector<sbdc::graph::WeightedEdge> edges;
    for (int v = 1; v < n; ++v) {
        int parent = uniform_int(rng, 0, v - 1);
        edges.push_back({parent + 1, v + 1, uniform(rng, wlo, whi)});
    }
    return sbdc::graph::build_graph(n, edges);
}

// Random connected graph: spanning tree plus extra chords, capped by the
// complete graph's edge budget.
inline sbdc::graph::Graph random_connected(std::mt19937_64& rng, int n, int extra, double wlo,
                                           double whi) {
    std::vector<sbdc::graph::WeightedEdge> edges;
    std::vector<std::vector<bool>> present(n, std::vector<bool>(n, false));
    for (int v = 1; v < n; ++v) {
        int parent = uniform_int(rng, 0, v - 1);
        edges.push_back({parent + 1, v + 1, uniform(rng, wlo, whi)});
        present[parent][v] = present[v][parent] = true;
    }
    int target = std::min(n - 1 + extra, n * (n - 1) / 2);
    while (static_cast<int>(edges.size()) < target) {
        int a = uniform_int(rng, 0, n - 1);
        int b = uniform_int(rng, 0, n - 1);
        if (a == b || present[a][b]) continue;
        present[a][b] = present[b][a] = true;
        edges.push_back({a + 1, b + 1, uniform(rng, wlo, whi)});
    }
    return sbdc::graph::build_graph(n, edges);
}

inline std::vector<sbdc::graph::Edge> random_edge_subset(std::mt19937_64& rng,
                                                         const sbdc::graph::Graph& g, int size) {
    std::vector<int> idx(g.edges.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
    for (int k = static_cast<int>(idx.size()) - 1; k > 0; --k)
        std::swap(idx[k], idx[uniform_int(rng, 0, k)]);
    std::vector<sbdc::graph::Edge> subset;
    for (int k = 0; k < size; ++k) subset.push_back(g.edges[idx[k]]);
    return subset;
}

// Six-node benchmark tree and its two attacked edge sets.
inline sbdc::graph::Graph benchmark_graph() {
    return sbdc::graph::build_graph(
        6, {{1, 2, 3.0}, {3, 5, 1.0}, {4, 6, 1.0}, {2, 4, 2.0}, {2, 3, 2.0}});
}

inline std::vector<sbdc::graph::Edge> attack_set_1() { return {{1, 2}}; }

inline std::vector<sbdc::graph::Edge> attack_set_2() { return {{1, 2}, {3, 5}, {4, 6}}; }

}  // namespace oracle
