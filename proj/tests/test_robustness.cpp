#include <catch2/catch_amalgamated.hpp>

#include "sbdc/robustness.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace sbdc;
using namespace sbdc::robustness;
using Catch::Approx;

namespace {

std::vector<int> canonical_indices(const graph::Graph& g, const std::vector<graph::Edge>& edges) {
    std::vector<int> idx;
    for (const auto& e : edges) idx.push_back(g.edge_index(graph::make_edge(e.u, e.v)));
    std::sort(idx.begin(), idx.end());
    return idx;
}

graph::Graph unit_triangle() {
    return graph::build_graph(3, {{1, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}});
}

}  // namespace

TEST_CASE("resistance profile on elementary graphs", "[robustness]") {
    SECTION("single unit edge is its own resistance") {
        graph::Graph g = graph::build_graph(2, {{1, 2, 1.0}});
        ResistanceProfile prof = effective_resistance_multi(g, {{1, 2}});
        REQUIRE(prof.r_multi == Approx(1.0).margin(1e-13));
        REQUIRE(prof.r_star == Approx(1.0).margin(1e-13));
        REQUIRE(prof.r_tot == Approx(1.0).margin(1e-13));
        REQUIRE(prof.argmax_edge == graph::Edge{1, 2});
    }
    SECTION("one attacked edge of the unit triangle") {
        ResistanceProfile prof = effective_resistance_multi(unit_triangle(), {{1, 2}});
        REQUIRE(prof.r_multi == Approx(2.0 / 3.0).margin(1e-13));
        REQUIRE(prof.r_star == prof.r_multi);
        REQUIRE(resilience_gap(prof) == 0.0);
    }
    SECTION("two attacked edges of the unit triangle") {
        ResistanceProfile prof = effective_resistance_multi(unit_triangle(), {{1, 2}, {1, 3}});
        REQUIRE(prof.r_multi == Approx(1.0).margin(1e-12));
        REQUIRE(prof.r_star == Approx(2.0 / 3.0).margin(1e-12));
        REQUIRE(prof.r_tot == Approx(4.0 / 3.0).margin(1e-12));
        REQUIRE(prof.argmax_edge == graph::Edge{1, 2});
        REQUIRE(resilience_gap(prof) == Approx(1.0 / 3.0).margin(1e-12));
    }
    SECTION("invalid profiles are rejected") {
        REQUIRE_THROWS_AS(resilience_gap(ResistanceProfile{}), ValidationError);
    }
}

TEST_CASE("cut-set route matches the pseudoinverse oracle", "[robustness]") {
    std::mt19937_64 rng(401);
    for (int trial = 0; trial < 100; ++trial) {
        int n = oracle::uniform_int(rng, 3, 10);
        graph::Graph g = oracle::random_connected(rng, n, oracle::uniform_int(rng, 0, 4), 0.1, 10.0);
        int size = oracle::uniform_int(rng, 1, std::min(4, g.m()));
        auto attacked = oracle::random_edge_subset(rng, g, size);
        ResistanceProfile prof = effective_resistance_multi(g, attacked);

        Eigen::MatrixXd gram = oracle::resistance_gram(graph::incidence_matrix(g), g.weights,
                                                       canonical_indices(g, attacked));
        double scale = std::max(1.0, gram.diagonal().maxCoeff());
        REQUIRE(prof.r_multi == Approx(oracle::spectral_norm_sym(gram)).margin(1e-9 * scale));
        REQUIRE(prof.r_star == Approx(gram.diagonal().maxCoeff()).margin(1e-9 * scale));
        REQUIRE(prof.r_tot == Approx(gram.trace()).margin(1e-9 * scale));
        REQUIRE(oracle::sym_eigenvalues(gram).minCoeff() >= -1e-9 * scale);
    }
}

TEST_CASE("resistance values are orientation invariant", "[robustness]") {
    std::mt19937_64 rng(402);
    for (int trial = 0; trial < 30; ++trial) {
        graph::Graph g = oracle::random_connected(rng, oracle::uniform_int(rng, 3, 8),
                                                  oracle::uniform_int(rng, 0, 3), 0.2, 5.0);
        auto attacked =
            oracle::random_edge_subset(rng, g, oracle::uniform_int(rng, 1, std::min(3, g.m())));

        Eigen::MatrixXd flipped = graph::incidence_matrix(g);
        for (int k = 0; k < g.m(); ++k)
            if (oracle::uniform(rng, 0.0, 1.0) < 0.5) flipped.col(k) *= -1.0;
        Eigen::MatrixXd gram =
            oracle::resistance_gram(flipped, g.weights, canonical_indices(g, attacked));

        ResistanceProfile prof = effective_resistance_multi(g, attacked);
        REQUIRE(prof.r_multi == Approx(oracle::spectral_norm_sym(gram)).margin(1e-9));
        REQUIRE(prof.r_star == Approx(gram.diagonal().maxCoeff()).margin(1e-9));
        REQUIRE(prof.r_tot == Approx(gram.trace()).margin(1e-9));
    }
}

TEST_CASE("resistance ordering holds across random graphs", "[robustness]") {
    std::mt19937_64 rng(403);
    for (int trial = 0; trial < 200; ++trial) {
        int n = oracle::uniform_int(rng, 3, 12);
        graph::Graph g = oracle::random_connected(rng, n, oracle::uniform_int(rng, 0, 5), 0.1, 10.0);
        auto attacked =
            oracle::random_edge_subset(rng, g, oracle::uniform_int(rng, 1, std::min(5, g.m())));
        ResistanceProfile prof = effective_resistance_multi(g, attacked);
        REQUIRE(prof.r_star > 0.0);
        REQUIRE(prof.r_star <= prof.r_multi + 1e-9);
        REQUIRE(prof.r_multi <= prof.r_tot + 1e-9);
    }
}

TEST_CASE("tree collapse and singleton collapse", "[robustness]") {
    std::mt19937_64 rng(404);
    SECTION("on trees every attacked subset collapses to the worst inverse weight") {
        for (int trial = 0; trial < 25; ++trial) {
            graph::Graph g = oracle::random_tree(rng, oracle::uniform_int(rng, 3, 9), 0.25, 4.0);
            for (int size = 1; size <= g.m(); ++size) {
                auto attacked = oracle::random_edge_subset(rng, g, size);
                ResistanceProfile prof = effective_resistance_multi(g, attacked);
                double fast = 0.0;
                for (const auto& e : attacked)
                    fast = std::max(fast, 1.0 / g.weights(g.edge_index(e)));
                REQUIRE(std::abs(prof.r_multi - fast) <= 1e-12);
                REQUIRE(resilience_gap(prof) <= 1e-12);
            }
        }
    }
    SECTION("singleton attacks have exactly zero gap on cyclic graphs") {
        for (int trial = 0; trial < 50; ++trial) {
            graph::Graph g = oracle::random_connected(rng, oracle::uniform_int(rng, 3, 9),
                                                      oracle::uniform_int(rng, 1, 4), 0.1, 10.0);
            auto attacked = oracle::random_edge_subset(rng, g, 1);
            REQUIRE(resilience_gap(effective_resistance_multi(g, attacked)) == 0.0);
        }
    }
}

TEST_CASE("benchmark resistance and certificate anchors", "[robustness]") {
    graph::Graph g = oracle::benchmark_graph();
    ResistanceProfile light = effective_resistance_multi(g, oracle::attack_set_1());
    ResistanceProfile heavy = effective_resistance_multi(g, oracle::attack_set_2());

    SECTION("resistances on the two attacked sets") {
        REQUIRE(light.r_multi == Approx(1.0 / 3.0).margin(1e-12));
        REQUIRE(light.argmax_edge == graph::Edge{1, 2});
        REQUIRE(resilience_gap(light) == 0.0);

        REQUIRE(heavy.r_multi == Approx(1.0).margin(1e-12));
        REQUIRE(heavy.r_star == Approx(1.0).margin(1e-12));
        REQUIRE(heavy.r_tot == Approx(7.0 / 3.0).margin(1e-12));
        REQUIRE(heavy.argmax_edge == graph::Edge{3, 5});
        REQUIRE(resilience_gap(heavy) <= 1e-12);
    }
    SECTION("continuous-time codeword bounds hit 0.5 for both designs") {
        CodewordBoundCt first = codeword_bound_ct(light, 6.0);
        CodewordBoundCt second = codeword_bound_ct(heavy, 2.0);
        REQUIRE(first.rho_ct == Approx(0.5).margin(1e-12));
        REQUIRE(second.rho_ct == Approx(0.5).margin(1e-12));
        REQUIRE(first.rho_ct == Approx((1.0 - first.gap) * first.rho_star).margin(1e-12));
        REQUIRE(second.rho_ct == Approx((1.0 - second.gap) * second.rho_star).margin(1e-12));
        REQUIRE(codeword_bound_ct(light, 12.0).rho_ct == Approx(0.25).margin(1e-12));
        REQUIRE_THROWS_AS(codeword_bound_ct(light, 0.0), NonPositiveLipschitz);
    }
    SECTION("optimal step sizes") {
        EpsilonStar e1 = epsilon_star(g, light);
        EpsilonStar e2 = epsilon_star(g, heavy);
        REQUIRE(e1.value == Approx(0.1).margin(1e-12));
        REQUIRE(e2.value == Approx(0.125).margin(1e-12));
        REQUIRE(e1.value <= e2.value);
        double lambda_n = oracle::sym_eigenvalues(graph::laplacian(g)).maxCoeff();
        REQUIRE(e1.two_over_lambda_n == Approx(2.0 / lambda_n).margin(1e-12));
        REQUIRE(e1.two_over_lambda_n == Approx(0.2084).margin(5e-4));
        REQUIRE(e1.within_stable_interval);
        REQUIRE(e2.within_stable_interval);
    }
    SECTION("discrete-time bound matches the continuous one for admissible steps") {
        REQUIRE(codeword_bound_dt(g, heavy, 2.0, 0.1) == Approx(0.5).margin(1e-12));
        REQUIRE(codeword_bound_dt(g, light, 6.0, 0.1) == Approx(0.5).margin(1e-12));
        REQUIRE(codeword_bound_dt(g, light, 6.0, 1e-9) ==
                Approx(codeword_bound_ct(light, 6.0).rho_ct).margin(1e-12));
        REQUIRE(codeword_bound_dt(g, heavy, 2.0, 0.13) <
                codeword_bound_ct(heavy, 2.0).rho_ct);
        REQUIRE_THROWS_AS(codeword_bound_dt(g, light, 6.0, 0.25), EpsilonTooLarge);
        REQUIRE_THROWS_AS(codeword_bound_dt(g, light, 6.0, 1.0 / 7.0), EpsilonTooLarge);
        REQUIRE_THROWS_AS(codeword_bound_dt(g, light, 6.0, 0.0), EpsilonTooLarge);
        REQUIRE_THROWS_AS(codeword_bound_dt(g, light, 6.0, -0.1), EpsilonTooLarge);
        REQUIRE_THROWS_AS(codeword_bound_dt(g, light, 0.0, 0.1), NonPositiveLipschitz);
    }
}

TEST_CASE("degree inflation check for discrete steps", "[robustness]") {
    graph::Graph g = oracle::benchmark_graph();
    coding::CodingAssignment design =
        coding::CodingAssignment::uniform(g, coding::DecodingFunction::paper(2.0));

    SECTION("three-edge benchmark attack at the optimal step") {
        PhiCheck pc = phi_check_dt(g, design, attack::paper_attack(2, 0.5), 0.1);
        REQUIRE(pc.phi == 7.5);
        REQUIRE(pc.phi_coarse == 7.5);
        REQUIRE(pc.inv_epsilon == Approx(10.0).margin(1e-12));
        REQUIRE(pc.rho_ct == Approx(0.5).margin(1e-12));
        REQUIRE(pc.attack_inf_norm == 0.25);
        REQUIRE(pc.phi_ok);
        REQUIRE(pc.bound_ok);
        REQUIRE(pc.verdict);
    }
    SECTION("a zero attack reduces to the weighted degree test") {
        attack::AttackSpec zero = attack::make_attack_spec({{1, 2}}, {{{1, 2}, 0.0}}, 0.0);
        PhiCheck tight = phi_check_dt(g, design, zero, 0.1);
        REQUIRE(tight.phi == 7.0);
        REQUIRE(tight.verdict);
        PhiCheck loose = phi_check_dt(g, design, zero, 0.2);
        REQUIRE_FALSE(loose.phi_ok);
        REQUIRE_FALSE(loose.verdict);
        REQUIRE_THROWS_AS(phi_check_dt(g, design, zero, 0.0), EpsilonTooLarge);
    }
    SECTION("the exact value never exceeds the coarse bound") {
        std::mt19937_64 rng(405);
        for (int trial = 0; trial < 100; ++trial) {
            graph::Graph h = oracle::random_connected(rng, oracle::uniform_int(rng, 3, 8),
                                                      oracle::uniform_int(rng, 0, 3), 0.3, 4.0);
            coding::CodingAssignment c = coding::CodingAssignment::uniform(
                h, coding::DecodingFunction::paper(oracle::uniform(rng, 0.5, 6.0)));
            auto support =
                oracle::random_edge_subset(rng, h, oracle::uniform_int(rng, 1, std::min(3, h.m())));
            attack::AttackSpec atk =
                attack::random_attack(h, support, oracle::uniform(rng, 0.0, 0.5), rng());
            PhiCheck pc = phi_check_dt(h, c, atk, oracle::uniform(rng, 0.01, 0.2));
            REQUIRE(pc.phi <= pc.phi_coarse + 1e-12);
            REQUIRE(pc.verdict == (pc.phi_ok && pc.bound_ok));
        }
    }
}

TEST_CASE("compensated Lipschitz constant restores the single-edge target", "[robustness]") {
    SECTION("closed forms") {
        REQUIRE(compensated_lipschitz(6.0, 0.0) == 6.0);
        REQUIRE(compensated_lipschitz(6.0, 0.5) == 3.0);
        REQUIRE_THROWS_AS(compensated_lipschitz(0.0, 0.2), NonPositiveLipschitz);
        REQUIRE_THROWS_AS(compensated_lipschitz(2.0, 1.0), ValidationError);
        REQUIRE_THROWS_AS(compensated_lipschitz(2.0, -0.1), ValidationError);
    }
    SECTION("triangle two-edge attack") {
        ResistanceProfile prof = effective_resistance_multi(unit_triangle(), {{1, 2}, {1, 3}});
        double gap = resilience_gap(prof);
        REQUIRE(gap > 0.0);
        double k = 6.0;
        double kprime = compensated_lipschitz(k, gap);
        CodewordBoundCt base = codeword_bound_ct(prof, k);
        CodewordBoundCt comp = codeword_bound_ct(prof, kprime);
        REQUIRE(comp.rho_star == Approx(base.rho_star / (1.0 - gap)).margin(1e-12));
        REQUIRE(comp.rho_star > base.rho_star);
        REQUIRE(comp.rho_ct == Approx(base.rho_star).margin(1e-12));
    }
}

TEST_CASE("weight perturbation certificates", "[robustness]") {
    SECTION("zero perturbation is always certified") {
        graph::Graph g = oracle::benchmark_graph();
        attack::WeightPerturbation wp;
        for (const auto& e : oracle::attack_set_2()) wp.delta_w[e] = 0.0;
        CertificateCheck cert = certify_weight_perturbation(g, oracle::attack_set_2(), wp);
        REQUIRE(cert.ok);
        REQUIRE(cert.value == 0.0);
        REQUIRE(cert.slack == cert.bound);
    }
    SECTION("zeroing a tree edge sits exactly on the boundary and fails") {
        graph::Graph g = graph::build_graph(3, {{1, 2, 4.0}, {2, 3, 3.0}});
        attack::WeightPerturbation wp;
        wp.delta_w[{1, 2}] = -4.0;
        wp.norm = 4.0;
        CertificateCheck cert = certify_weight_perturbation(g, {{1, 2}}, wp);
        REQUIRE(cert.bound == 4.0);
        REQUIRE_FALSE(cert.ok);
        REQUIRE(cert.slack == 0.0);
    }
    SECTION("benchmark decode deviations are certified") {
        graph::Graph g = oracle::benchmark_graph();
        coding::CodingAssignment design =
            coding::CodingAssignment::uniform(g, coding::DecodingFunction::paper(2.0));
        coding::Codeword cw = coding::synthesize_codeword(g, design);
        attack::WeightPerturbation wp =
            attack::induced_weight_perturbation(g, design, cw, attack::paper_attack(2, 0.5));
        CertificateCheck cert = certify_weight_perturbation(g, oracle::attack_set_2(), wp);
        REQUIRE(cert.ok);
        REQUIRE(cert.bound == Approx(1.0).margin(1e-12));
        REQUIRE(cert.value == Approx(0.435255916).margin(1e-9));
        REQUIRE(cert.slack == Approx(0.564744084).margin(1e-9));
    }
    SECTION("support mismatches are rejected") {
        graph::Graph g = oracle::benchmark_graph();
        attack::WeightPerturbation wp;
        wp.delta_w[{1, 2}] = 0.1;
        REQUIRE_THROWS_AS(certify_weight_perturbation(g, oracle::attack_set_2(), wp),
                          ValidationError);
        wp.delta_w[{2, 3}] = 0.1;
        wp.delta_w[{2, 4}] = 0.1;
        REQUIRE_THROWS_AS(certify_weight_perturbation(g, oracle::attack_set_2(), wp),
                          ValidationError);
    }
}

TEST_CASE("Monte-Carlo soundness of the certificates", "[robustness]") {
    std::mt19937_64 rng(406);
    SECTION("weight perturbations under the resistance bound keep the Laplacian sound") {
        for (int trial = 0; trial < 60; ++trial) {
            graph::Graph g = oracle::random_connected(rng, oracle::uniform_int(rng, 3, 9),
                                                      oracle::uniform_int(rng, 0, 3), 0.1, 10.0);
            auto attacked =
                oracle::random_edge_subset(rng, g, oracle::uniform_int(rng, 1, std::min(4, g.m())));
            ResistanceProfile prof = effective_resistance_multi(g, attacked);
            double bound = 0.99 / prof.r_multi;

            attack::WeightPerturbation wp;
            bool forced = false;
            for (const auto& e : attacked) {
                double d = oracle::uniform(rng, -bound, bound);
                if (!forced) {
                    d = oracle::uniform(rng, 0.0, 1.0) < 0.5 ? -bound : bound;
                    forced = true;
                }
                wp.delta_w[graph::make_edge(e.u, e.v)] = d;
                wp.norm = std::max(wp.norm, std::abs(d));
            }
            REQUIRE(certify_weight_perturbation(g, attacked, wp).ok);

            Eigen::VectorXd eigs = oracle::sym_eigenvalues(
                graph::laplacian(g, attack::apply_perturbation(g, wp)));
            REQUIRE(eigs.minCoeff() >= -1e-9);
            REQUIRE((eigs.array() < 1e-9).count() == 1);
        }
    }
    SECTION("codeword deviations below rho always certify after decoding") {
        for (int trial = 0; trial < 60; ++trial) {
            graph::Graph g = oracle::random_connected(rng, oracle::uniform_int(rng, 3, 8),
                                                      oracle::uniform_int(rng, 0, 3), 0.3, 3.0);
            double gain = oracle::uniform(rng, 0.5, 6.0);
            coding::CodingAssignment design =
                coding::CodingAssignment::uniform(g, coding::DecodingFunction::paper(gain));
            auto support =
                oracle::random_edge_subset(rng, g, oracle::uniform_int(rng, 1, std::min(3, g.m())));

            double rho = codeword_bound_ct(effective_resistance_multi(g, support), gain).rho_ct;
            std::map<graph::Edge, double> devs;
            double raw_max = 0.0;
            for (const auto& e : support) {
                double raw = oracle::uniform(rng, -1.0, 1.0);
                devs[graph::make_edge(e.u, e.v)] = raw;
                raw_max = std::max(raw_max, std::abs(raw));
            }
            if (raw_max == 0.0) {
                devs.begin()->second = raw_max = 1.0;
            }
            double budget = 0.99 * rho;
            for (auto& [e, d] : devs) d = d / raw_max * budget;
            attack::AttackSpec atk = attack::make_attack_spec(support, devs, budget);

            coding::Codeword cw = coding::synthesize_codeword(g, design);
            attack::WeightPerturbation wp =
                attack::induced_weight_perturbation(g, design, cw, atk);
            CertificateCheck cert = certify_weight_perturbation(g, support, wp);
            REQUIRE(cert.ok);
            REQUIRE(cert.slack > 0.0);
        }
    }
    SECTION("diagonal perturbations have spectral norm equal to the largest entry") {
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd d(oracle::uniform_int(rng, 1, 6));
            for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = oracle::uniform(rng, -3.0, 3.0);
            REQUIRE(oracle::spectral_norm_sym(Eigen::MatrixXd(d.asDiagonal())) ==
                    Approx(d.cwiseAbs().maxCoeff()).margin(1e-12));
        }
    }
}

TEST_CASE("attack analysis report", "[robustness]") {
    graph::Graph g = oracle::benchmark_graph();
    coding::CodingAssignment design =
        coding::CodingAssignment::uniform(g, coding::DecodingFunction::paper(2.0));
    attack::AttackSpec atk = attack::paper_attack(2, 0.5);

    SECTION("continuous-time only") {
        RobustnessReport rep = analyze_attack(g, design, atk);
        REQUIRE(rep.resistance.r_multi == Approx(1.0).margin(1e-12));
        REQUIRE(rep.k_delta == 2.0);
        REQUIRE(rep.rho_ct == Approx(0.5).margin(1e-12));
        REQUIRE(rep.rho_star == Approx(0.5).margin(1e-12));
        REQUIRE(rep.gap <= 1e-12);
        REQUIRE(rep.eps_star.value == Approx(0.125).margin(1e-12));
        REQUIRE(rep.attack_inf_norm == 0.25);
        REQUIRE(rep.ct_bound_ok);
        REQUIRE_FALSE(rep.has_dt);
    }
    SECTION("with an admissible step") {
        RobustnessReport rep = analyze_attack(g, design, atk, 0.1);
        REQUIRE(rep.has_dt);
        REQUIRE(rep.epsilon_admissible);
        REQUIRE(rep.rho_dt == Approx(0.5).margin(1e-12));
        REQUIRE(rep.dt_bound_ok);
        REQUIRE(rep.phi.verdict);
    }
    SECTION("with an inadmissible step the report still carries the CT side") {
        RobustnessReport rep = analyze_attack(g, design, atk, 0.25);
        REQUIRE(rep.has_dt);
        REQUIRE_FALSE(rep.epsilon_admissible);
        REQUIRE_FALSE(rep.dt_bound_ok);
        REQUIRE(rep.ct_bound_ok);
        REQUIRE_FALSE(rep.phi.phi_ok);
        REQUIRE_FALSE(rep.phi.verdict);
    }
    SECTION("first benchmark design") {
        coding::CodingAssignment strong =
            coding::CodingAssignment::uniform(g, coding::DecodingFunction::paper(6.0));
        RobustnessReport rep = analyze_attack(g, strong, attack::paper_attack(1, 0.5), 0.1);
        REQUIRE(rep.resistance.r_multi == Approx(1.0 / 3.0).margin(1e-12));
        REQUIRE(rep.rho_ct == Approx(0.5).margin(1e-12));
        REQUIRE(rep.rho_dt == Approx(rep.rho_ct).margin(1e-12));
        REQUIRE(rep.eps_star.value == Approx(0.1).margin(1e-12));
        REQUIRE(rep.ct_bound_ok);
        REQUIRE(rep.dt_bound_ok);
    }
}
