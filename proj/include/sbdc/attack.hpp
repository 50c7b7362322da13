#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sbdc/coding.hpp"
#include "sbdc/errors.hpp"
#include "sbdc/graph.hpp"
#include "sbdc/random.hpp"

namespace sbdc::attack {

using coding::Codeword;
using coding::CodingAssignment;
using graph::Edge;
using graph::Graph;
using graph::Vector;

// Structured codeword tampering: symmetric per-edge deviations on a fixed
// support with a declared infinity-norm budget.
struct AttackSpec {
    std::vector<Edge> support;  // canonical order, nonempty
    std::map<Edge, double> deviations;
    double budget = 0.0;

    double inf_norm() const {
        double norm = 0.0;
        for (const auto& [e, d] : deviations) norm = std::max(norm, std::abs(d));
        return norm;
    }
};

// Validating constructor; budget violations are errors, never clamped.
inline AttackSpec make_attack_spec(const std::vector<Edge>& support,
                                   const std::map<Edge, double>& deviations, double budget) {
    if (support.empty()) throw EmptySupport("attack support is empty");
    if (!(budget >= 0.0))
        throw ValidationError("attack budget must be nonnegative, got " + std::to_string(budget));
    AttackSpec spec;
    spec.budget = budget;
    for (const auto& e : support) spec.support.push_back(graph::make_edge(e.u, e.v));
    std::sort(spec.support.begin(), spec.support.end());
    for (std::size_t k = 1; k < spec.support.size(); ++k)
        if (spec.support[k] == spec.support[k - 1])
            throw DuplicateEdge("attacked edge " + graph::edge_label(spec.support[k]) +
                                " listed twice");
    for (const auto& [e, d] : deviations)
        spec.deviations.emplace(graph::make_edge(e.u, e.v), d);
    if (spec.deviations.size() != spec.support.size() ||
        !std::equal(spec.support.begin(), spec.support.end(), spec.deviations.begin(),
                    [](const Edge& e, const auto& kv) { return e == kv.first; }))
        throw ValidationError("deviation keys must equal the attack support");
    for (const auto& [e, d] : spec.deviations)
        if (std::abs(d) > budget)
            throw ValidationError("deviation " + std::to_string(d) + " on edge " +
                                  graph::edge_label(e) + " exceeds the budget " +
                                  std::to_string(budget));
    return spec;
}

// The two benchmark attacks: deviation -0.5 rho on edge (1,2) alone, or on
// the set {(1,2), (3,5), (4,6)}.
inline AttackSpec paper_attack(int variant, double rho) {
    if (variant != 1 && variant != 2)
        throw UnknownVariant("attack variant must be 1 or 2, got " + std::to_string(variant));
    if (!(rho >= 0.0))
        throw ValidationError("attack amplitude must be nonnegative, got " + std::to_string(rho));
    std::vector<Edge> support{{1, 2}};
    if (variant == 2) {
        support.push_back({3, 5});
        support.push_back({4, 6});
    }
    std::map<Edge, double> deviations;
    for (const auto& e : support) deviations.emplace(e, -0.5 * rho);
    return make_attack_spec(support, deviations, 0.5 * rho);
}

// Deviations i.i.d. uniform on [-budget, budget], drawn in canonical support
// order so the result is a pure function of (graph, support, budget, seed).
inline AttackSpec random_attack(const Graph& g, const std::vector<Edge>& support, double budget,
                                std::uint64_t seed) {
    if (support.empty()) throw EmptySupport("attack support is empty");
    if (!(budget >= 0.0))
        throw ValidationError("attack budget must be nonnegative, got " + std::to_string(budget));
    graph::EdgeSelector sel = graph::edge_selector(g, support);
    std::mt19937_64 rng(seed);
    std::vector<Edge> canonical;
    std::map<Edge, double> deviations;
    for (int k : sel.support) {
        canonical.push_back(g.edges[k]);
        deviations.emplace(g.edges[k], rnd::uniform(rng, -budget, budget));
    }
    return make_attack_spec(canonical, deviations, budget);
}

// Decode with tampered fragments; edges off the support keep the nominal
// decode bit for bit.
inline Vector decode_weights(const Graph& g, const CodingAssignment& coding, const Codeword& cw,
                             const AttackSpec& atk) {
    Vector w = coding::decode_weights(g, coding, cw);
    for (const auto& [e, d] : atk.deviations)
        w(g.edge_index(e)) = coding.at(e)(cw.at(e) + d);
    return w;
}

// Diagonal effective-weight perturbation; for diagonal structure the spectral
// norm is the largest absolute entry.
struct WeightPerturbation {
    std::map<Edge, double> delta_w;
    double norm = 0.0;
};

inline Vector apply_perturbation(const Graph& g, const WeightPerturbation& wp) {
    Vector w = g.weights;
    for (const auto& [e, d] : wp.delta_w) w(g.edge_index(e)) += d;
    return w;
}

inline WeightPerturbation induced_weight_perturbation(const Graph& g,
                                                      const CodingAssignment& coding,
                                                      const Codeword& cw,
                                                      const AttackSpec& atk) {
    WeightPerturbation wp;
    for (const auto& [e, d] : atk.deviations) {
        g.edge_index(e);  // unknown support edges fail early
        const coding::DecodingFunction& f = coding.at(e);
        double delta = f(cw.at(e) + d) - f(cw.at(e));
        wp.delta_w.emplace(e, delta);
        wp.norm = std::max(wp.norm, std::abs(delta));
    }
    return wp;
}

}  // namespace sbdc::attack
