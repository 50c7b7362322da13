#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sbdc/errors.hpp"
#include "sbdc/graph.hpp"
#include "sbdc/random.hpp"

namespace sbdc::coding {

using graph::Edge;
using graph::Graph;
using graph::Vector;

struct Domain {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Concave Lipschitz map from a codeword fragment to an edge weight.
// The built-in family with gain K:
//   p(eta) = K eta                      for eta < 0
//   p(eta) = K (eta - 2/13 eta^2)       for 0 <= eta < 3
//   p(eta) = K (4/13 sqrt(eta+1) + 1)   for eta >= 3
// It is C^1 and strictly increasing, with slope K as eta -> 0 from below.
class DecodingFunction {
  public:
    static DecodingFunction paper(double gain) {
        if (!(gain > 0.0))
            throw NonPositiveGain("decoder gain must be positive, got " + std::to_string(gain));
        DecodingFunction f;
        f.family_ = "paper";
        f.gain_ = gain;
        f.lipschitz_ = gain;
        f.breakpoints_ = {0.0, 3.0};
        f.eval_ = [gain](double eta) {
            if (eta < 0.0) return gain * eta;
            if (eta < 3.0) return gain * (eta - 2.0 / 13.0 * eta * eta);
            return gain * (4.0 / 13.0 * std::sqrt(eta + 1.0) + 1.0);
        };
        return f;
    }

    static DecodingFunction custom(std::string name, std::function<double(double)> eval,
                                   double lipschitz, Domain domain = {},
                                   std::vector<double> breakpoints = {}) {
        if (!(lipschitz >= 0.0))
            throw NonPositiveLipschitz("declared Lipschitz constant must be nonnegative, got " +
                                       std::to_string(lipschitz));
        DecodingFunction f;
        f.family_ = std::move(name);
        f.eval_ = std::move(eval);
        f.lipschitz_ = lipschitz;
        f.domain_ = domain;
        f.breakpoints_ = std::move(breakpoints);
        return f;
    }

    double operator()(double theta) const {
        if (!domain_.contains(theta))
            throw DomainViolation("codeword value " + std::to_string(theta) +
                                  " leaves the decoder domain");
        return eval_(theta);
    }

    const std::string& family() const { return family_; }
    double gain() const { return gain_; }
    double lipschitz() const { return lipschitz_; }
    const Domain& domain() const { return domain_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

  private:
    DecodingFunction() = default;

    std::string family_;
    std::function<double(double)> eval_;
    double gain_ = 0.0;
    double lipschitz_ = 0.0;
    Domain domain_;
    std::vector<double> breakpoints_;
};

inline DecodingFunction paper_decoder(double gain) { return DecodingFunction::paper(gain); }

// Per-edge codeword fragments; theta_ij = theta_ji is stored once under the
// canonical edge key.
struct Codeword {
    std::map<Edge, double> entries;

    double at(const Edge& e) const {
        auto it = entries.find(e);
        if (it == entries.end())
            throw UnknownEdge("no codeword fragment for edge " + graph::edge_label(e));
        return it->second;
    }
};

struct CodingAssignment {
    std::map<Edge, DecodingFunction> functions;

    static CodingAssignment uniform(const Graph& g, const DecodingFunction& f) {
        CodingAssignment c;
        for (const auto& e : g.edges) c.functions.emplace(e, f);
        return c;
    }

    const DecodingFunction& at(const Edge& e) const {
        auto it = functions.find(e);
        if (it == functions.end())
            throw UnknownEdge("no decoding function for edge " + graph::edge_label(e));
        return it->second;
    }
};

// Smallest preimage of w on the increasing region of a concave decoder:
// expand a bracket from the anchor, fall back to a ternary argmax search once
// the function stops increasing, then bisect.
inline double preimage(const DecodingFunction& f, double w) {
    const Domain& dom = f.domain();
    double anchor = std::clamp(0.0, dom.lo, dom.hi);

    double lo = anchor;
    double step = 1.0;
    while (f(lo) > w) {
        if (lo == dom.lo || step > 1e154)
            throw WeightOutOfImage("weight " + std::to_string(w) +
                                   " lies below the decoder image");
        lo = std::max(dom.lo, lo - step);
        step *= 2.0;
    }

    double hi = lo;
    step = 1.0;
    while (f(hi) < w) {
        double next = std::min(dom.hi, hi + step);
        step *= 2.0;
        if (next == hi || step > 1e154)
            throw WeightOutOfImage("weight " + std::to_string(w) +
                                   " lies above the decoder image");
        if (f(next) <= f(hi)) {
            // passed the maximum of the concave profile
            double a = hi;
            double b = next;
            for (int it = 0; it < 300 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
                double m1 = a + (b - a) / 3.0;
                double m2 = b - (b - a) / 3.0;
                if (f(m1) < f(m2))
                    a = m1;
                else
                    b = m2;
            }
            if (f(a) < w)
                throw WeightOutOfImage("weight " + std::to_string(w) +
                                       " lies above the decoder image");
            hi = a;
            break;
        }
        hi = next;
    }

    for (int it = 0; it < 300 && lo < hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < w)
            lo = mid;
        else
            hi = mid;
    }
    return f(lo) >= w ? lo : hi;
}

// Network manager's side of the coding: invert every decoder at the nominal
// weight, deterministically picking the smallest increasing-region preimage.
inline Codeword synthesize_codeword(const Graph& g, const CodingAssignment& coding) {
    Codeword cw;
    for (int k = 0; k < g.m(); ++k) {
        const Edge& e = g.edges[k];
        const DecodingFunction& f = coding.at(e);
        double w = g.weights(k);
        double theta = preimage(f, w);
        if (std::abs(f(theta) - w) > 1e-10 * std::max(1.0, std::abs(w)))
            throw WeightOutOfImage("weight " + std::to_string(w) + " of edge " +
                                   graph::edge_label(e) + " is not attained by its decoder");
        cw.entries.emplace(e, theta);
    }
    return cw;
}

// Nominal decode; the attack-aware overload lives with the attack model.
inline Vector decode_weights(const Graph& g, const CodingAssignment& coding, const Codeword& cw) {
    Vector w(g.m());
    for (int k = 0; k < g.m(); ++k) w(k) = coding.at(g.edges[k])(cw.at(g.edges[k]));
    return w;
}

inline double aggregate_lipschitz(const CodingAssignment& coding,
                                  const std::vector<Edge>& attacked) {
    if (attacked.empty()) throw EmptyAttackSet("aggregate Lipschitz constant over an empty set");
    double k_delta = 0.0;
    for (const auto& e : attacked)
        k_delta = std::max(k_delta, coding.at(graph::make_edge(e.u, e.v)).lipschitz());
    return k_delta;
}

struct Assumption1Report {
    int samples = 0;
    double concavity_pass_rate = 0.0;
    double max_slope = 0.0;
    double declared_lipschitz = 0.0;
    double max_breakpoint_jump = 0.0;
    double value_spread = 0.0;
    bool concave_ok = false;
    bool lipschitz_ok = false;
    bool continuous_ok = false;
    bool nonconstant_ok = false;
    bool passed = false;
};

// Numerical audit of the standing decoder assumptions: concavity by midpoint
// tests, declared Lipschitz constant by sampled slopes, continuity at the
// declared breakpoints, and non-constancy.
inline Assumption1Report verify_assumption1(const DecodingFunction& f, int samples,
                                            std::uint64_t seed) {
    if (samples < 100)
        throw ValidationError("assumption audit needs at least 100 samples, got " +
                              std::to_string(samples));
    double lo = std::max(f.domain().lo, -20.0);
    double hi = std::min(f.domain().hi, 20.0);
    if (!(hi > lo)) throw ValidationError("decoder domain is too small to sample");

    std::mt19937_64 rng(seed);
    Assumption1Report rep;
    rep.samples = samples;
    rep.declared_lipschitz = f.lipschitz();

    int concave_pass = 0;
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    auto probe = [&](double x) {
        double y = f(x);
        vmin = std::min(vmin, y);
        vmax = std::max(vmax, y);
        return y;
    };
    for (int s = 0; s < samples; ++s) {
        double a = rnd::uniform(rng, lo, hi);
        double b = rnd::uniform(rng, lo, hi);
        double fa = probe(a);
        double fb = probe(b);
        if (probe(0.5 * (a + b)) >= 0.5 * (fa + fb) - 1e-9) ++concave_pass;
        if (std::abs(b - a) > 1e-12)
            rep.max_slope = std::max(rep.max_slope, std::abs(fb - fa) / std::abs(b - a));

        double c = rnd::uniform(rng, lo, hi - 1e-4);
        rep.max_slope = std::max(rep.max_slope, std::abs(probe(c + 1e-4) - probe(c)) / 1e-4);
    }
    for (double bp : f.breakpoints()) {
        double h = 1e-12;
        if (bp - h < f.domain().lo || bp + h > f.domain().hi) continue;
        rep.max_breakpoint_jump =
            std::max(rep.max_breakpoint_jump, std::abs(f(bp + h) - f(bp - h)));
    }

    rep.concavity_pass_rate = static_cast<double>(concave_pass) / samples;
    rep.value_spread = vmax - vmin;
    rep.concave_ok = concave_pass == samples;
    rep.lipschitz_ok = rep.max_slope <= rep.declared_lipschitz + 1e-9;
    rep.continuous_ok = rep.max_breakpoint_jump < 1e-9;
    rep.nonconstant_ok = rep.value_spread > 1e-12;
    rep.passed = rep.concave_ok && rep.lipschitz_ok && rep.continuous_ok && rep.nonconstant_ok;
    return rep;
}

}  // namespace sbdc::coding
