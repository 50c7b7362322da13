#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sbdc/attack.hpp"
#include "sbdc/coding.hpp"
#include "sbdc/errors.hpp"
#include "sbdc/graph.hpp"

namespace sbdc::robustness {

using graph::Edge;
using graph::Graph;
using graph::Matrix;
using graph::Vector;

struct ResistanceProfile {
    double r_multi = 0.0;    // spectral norm of the attacked-set Gram
    double r_star = 0.0;     // largest single-edge value within the set
    double r_tot = 0.0;      // trace of the Gram
    Edge argmax_edge{0, 0};  // attains r_star; smallest canonical index on ties
};

namespace detail {

// Weighted Gram of the attacked cut-set columns. Its diagonal entries are the
// singleton-selector values and its spectral norm is the multi-edge value.
inline Matrix attacked_gram(const Graph& g, const graph::EdgeSelector& sel) {
    graph::TreePartition part = graph::spanning_tree_partition(g);
    Matrix r = graph::cutset_matrix(g, part);
    Vector wperm(g.m());
    std::vector<int> column_of(g.m());
    for (int c = 0; c < g.m(); ++c) {
        wperm(c) = g.weights(part.permutation[c]);
        column_of[part.permutation[c]] = c;
    }
    Eigen::LLT<Matrix> llt(r * wperm.asDiagonal() * r.transpose());
    if (llt.info() != Eigen::Success)
        throw SingularTreeGram("weighted cut-set Gram is not positive definite");
    Matrix s(r.rows(), static_cast<int>(sel.support.size()));
    for (std::size_t k = 0; k < sel.support.size(); ++k)
        s.col(static_cast<int>(k)) = r.col(column_of[sel.support[k]]);
    Matrix m = s.transpose() * llt.solve(s);
    return 0.5 * (m + m.transpose());
}

inline double largest_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw Error("eigensolver did not converge");
    return es.eigenvalues().maxCoeff();
}

}  // namespace detail

inline ResistanceProfile effective_resistance_multi(const Graph& g,
                                                    const std::vector<Edge>& attacked) {
    graph::EdgeSelector sel = graph::edge_selector(g, attacked);
    Matrix m = detail::attacked_gram(g, sel);
    ResistanceProfile prof;
    // A singleton Gram needs no eigensolver; taking the entry directly keeps
    // the single-edge gap exactly zero.
    prof.r_multi = m.rows() == 1 ? m(0, 0) : detail::largest_eigenvalue(m);
    int best = 0;
    for (int k = 1; k < m.rows(); ++k)
        if (m(k, k) > m(best, best)) best = k;
    prof.r_star = m(best, best);
    prof.r_tot = m.trace();
    prof.argmax_edge = g.edges[sel.support[static_cast<std::size_t>(best)]];
    if (g.m() == g.n - 1) {
        // On a tree the cut-set matrix is the identity, so the value collapses
        // to the worst attacked inverse weight.
        double fast = 0.0;
        for (int k : sel.support) fast = std::max(fast, 1.0 / g.weights(k));
        if (std::abs(fast - prof.r_multi) > 1e-12 * std::max(1.0, fast))
            throw Error("tree fast path disagrees with the general formula");
    }
    return prof;
}

inline double resilience_gap(const ResistanceProfile& profile) {
    if (!(profile.r_multi > 0.0))
        throw ValidationError("resistance profile must be strictly positive");
    return std::max(0.0, 1.0 - profile.r_star / profile.r_multi);
}

struct CodewordBoundCt {
    double rho_ct = 0.0;    // 1 / (k_delta * r_multi)
    double rho_star = 0.0;  // 1 / (k_delta * r_star)
    double gap = 0.0;
};

inline CodewordBoundCt codeword_bound_ct(const ResistanceProfile& profile, double k_delta) {
    if (!(k_delta > 0.0))
        throw NonPositiveLipschitz("aggregate Lipschitz constant must be positive");
    CodewordBoundCt out;
    out.rho_ct = 1.0 / (k_delta * profile.r_multi);
    out.rho_star = 1.0 / (k_delta * profile.r_star);
    out.gap = resilience_gap(profile);
    if (std::abs(out.rho_ct - (1.0 - out.gap) * out.rho_star) > 1e-9 * out.rho_ct)
        throw Error("gap identity violated in the codeword bound");
    return out;
}

struct EpsilonStar {
    double value = 0.0;
    double two_over_lambda_n = 0.0;  // upper end of the nominal stable step interval
    bool within_stable_interval = false;
};

inline EpsilonStar epsilon_star(const Graph& g, const ResistanceProfile& profile) {
    EpsilonStar out;
    double psi = graph::weighted_degrees(g).psi;
    out.value = 1.0 / (psi + 1.0 / profile.r_multi);
    Eigen::SelfAdjointEigenSolver<Matrix> es(graph::laplacian(g));
    out.two_over_lambda_n = 2.0 / es.eigenvalues().maxCoeff();
    out.within_stable_interval = out.value < out.two_over_lambda_n;
    return out;
}

inline double codeword_bound_dt(const Graph& g, const ResistanceProfile& profile, double k_delta,
                                double epsilon) {
    if (!(k_delta > 0.0))
        throw NonPositiveLipschitz("aggregate Lipschitz constant must be positive");
    double psi = graph::weighted_degrees(g).psi;
    if (!(epsilon > 0.0 && epsilon < 1.0 / psi))
        throw EpsilonTooLarge("step size " + std::to_string(epsilon) +
                              " outside the admissible interval (0, " +
                              std::to_string(1.0 / psi) + ")");
    return std::min(1.0 / profile.r_multi, 1.0 / epsilon - psi) / k_delta;
}

struct PhiCheck {
    double phi = 0.0;              // per-edge inflated degree maximum
    double phi_coarse = 0.0;       // psi + k_delta * |delta|_inf, always >= phi
    double inv_epsilon = 0.0;
    double rho_ct = 0.0;
    double attack_inf_norm = 0.0;
    bool phi_ok = false;           // phi < 1/epsilon
    bool bound_ok = false;         // |delta|_inf < rho_ct
    bool verdict = false;
};

// Discrete-time admissibility of a concrete attack: each attacked edge
// inflates the weighted degree of its two endpoints by the worst weight
// deviation it can induce, and the protocol stays contractive when the
// inflated maximum clears 1/epsilon and the codeword bound holds.
inline PhiCheck phi_check_dt(const Graph& g, const coding::CodingAssignment& coding,
                             const attack::AttackSpec& atk, double epsilon) {
    if (!(epsilon > 0.0))
        throw EpsilonTooLarge("step size must be positive, got " + std::to_string(epsilon));
    graph::WeightedDegrees wd = graph::weighted_degrees(g);
    PhiCheck out;
    out.phi = wd.psi;
    for (const auto& [e, d] : atk.deviations) {
        double bump = coding.at(e).lipschitz() * std::abs(d);
        out.phi = std::max(out.phi, wd.degrees(e.u - 1) + bump);
        out.phi = std::max(out.phi, wd.degrees(e.v - 1) + bump);
    }
    double k_delta = coding::aggregate_lipschitz(coding, atk.support);
    out.attack_inf_norm = atk.inf_norm();
    out.phi_coarse = wd.psi + k_delta * out.attack_inf_norm;
    out.inv_epsilon = 1.0 / epsilon;
    out.rho_ct = codeword_bound_ct(effective_resistance_multi(g, atk.support), k_delta).rho_ct;
    out.phi_ok = out.phi < out.inv_epsilon;
    out.bound_ok = out.attack_inf_norm < out.rho_ct;
    out.verdict = out.phi_ok && out.bound_ok;
    return out;
}

inline double compensated_lipschitz(double k_delta, double gap) {
    if (!(k_delta > 0.0))
        throw NonPositiveLipschitz("aggregate Lipschitz constant must be positive");
    if (!(gap >= 0.0 && gap < 1.0))
        throw ValidationError("resilience gap must lie in [0, 1), got " + std::to_string(gap));
    return (1.0 - gap) * k_delta;
}

struct CertificateCheck {
    bool ok = false;
    double bound = 0.0;  // 1 / r_multi
    double value = 0.0;  // worst absolute weight deviation
    double slack = 0.0;  // bound - value, negative when violated
};

// Strict inequality with zero margin; callers apply their own safety factor
// using the reported slack.
inline CertificateCheck certify_weight_perturbation(const Graph& g,
                                                    const std::vector<Edge>& attacked,
                                                    const attack::WeightPerturbation& wp) {
    graph::EdgeSelector sel = graph::edge_selector(g, attacked);
    if (wp.delta_w.size() != sel.support.size())
        throw ValidationError("perturbation support does not match the attacked set");
    for (int k : sel.support)
        if (wp.delta_w.find(g.edges[k]) == wp.delta_w.end())
            throw ValidationError("perturbation support does not match the attacked set");
    ResistanceProfile prof = effective_resistance_multi(g, attacked);
    CertificateCheck out;
    out.bound = 1.0 / prof.r_multi;
    for (const auto& [e, d] : wp.delta_w) out.value = std::max(out.value, std::abs(d));
    out.slack = out.bound - out.value;
    out.ok = out.value < out.bound;
    return out;
}

struct RobustnessReport {
    ResistanceProfile resistance;
    double gap = 0.0;
    double k_delta = 0.0;
    double rho_ct = 0.0;
    double rho_star = 0.0;
    EpsilonStar eps_star;
    double attack_inf_norm = 0.0;
    bool ct_bound_ok = false;
    bool has_dt = false;  // discrete-time block populated
    double epsilon = 0.0;
    bool epsilon_admissible = false;
    double rho_dt = 0.0;  // meaningful only when epsilon_admissible
    bool dt_bound_ok = false;
    PhiCheck phi;  // meaningful only when has_dt
};

// Full certificate sweep for one attack. The discrete-time block is filled
// only when a step size is supplied; an inadmissible step is recorded rather
// than thrown so the continuous-time side still reaches the caller.
inline RobustnessReport analyze_attack(const Graph& g, const coding::CodingAssignment& coding,
                                       const attack::AttackSpec& atk,
                                       std::optional<double> epsilon = std::nullopt) {
    RobustnessReport rep;
    rep.resistance = effective_resistance_multi(g, atk.support);
    rep.k_delta = coding::aggregate_lipschitz(coding, atk.support);
    CodewordBoundCt ct = codeword_bound_ct(rep.resistance, rep.k_delta);
    rep.gap = ct.gap;
    rep.rho_ct = ct.rho_ct;
    rep.rho_star = ct.rho_star;
    rep.eps_star = epsilon_star(g, rep.resistance);
    rep.attack_inf_norm = atk.inf_norm();
    rep.ct_bound_ok = rep.attack_inf_norm < rep.rho_ct;
    if (epsilon) {
        rep.has_dt = true;
        rep.epsilon = *epsilon;
        try {
            rep.rho_dt = codeword_bound_dt(g, rep.resistance, rep.k_delta, *epsilon);
            rep.epsilon_admissible = true;
        } catch (const EpsilonTooLarge&) {
            rep.epsilon_admissible = false;
        }
        if (*epsilon > 0.0) {
            rep.phi = phi_check_dt(g, coding, atk, *epsilon);
            rep.dt_bound_ok = rep.epsilon_admissible && rep.attack_inf_norm < rep.rho_dt;
        }
    }
    return rep;
}

}  // namespace sbdc::robustness
