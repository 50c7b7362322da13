#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sbdc/scenario.hpp"

namespace {

using namespace sbdc;
using scenario::Scenario;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

const char* passfail(bool ok) { return ok ? "PASS" : "FAIL"; }

std::filesystem::path out_path(const Scenario& sc, const std::string& suffix) {
    std::filesystem::path dir = scenario::resolve_out_dir(sc.output.dir);
    std::string prefix = !sc.output.prefix.empty() ? sc.output.prefix
                         : !sc.name.empty()        ? sc.name
                                                   : "scenario";
    return dir / (prefix + suffix);
}

void print_certificates(const robustness::RobustnessReport& rep) {
    std::cout << "ct bound |delta| = " << fmt(rep.attack_inf_norm) << " < rho_ct = "
              << fmt(rep.rho_ct) << ": " << passfail(rep.ct_bound_ok) << "\n";
    if (rep.has_dt) {
        std::cout << "dt step epsilon = " << fmt(rep.epsilon)
                  << " admissible: " << passfail(rep.epsilon_admissible) << "\n";
        if (rep.epsilon_admissible) {
            std::cout << "dt bound |delta| < rho_dt = " << fmt(rep.rho_dt) << ": "
                      << passfail(rep.dt_bound_ok) << "\n";
            std::cout << "degree inflation phi = " << fmt(rep.phi.phi) << " < 1/epsilon = "
                      << fmt(rep.phi.inv_epsilon) << ": " << passfail(rep.phi.phi_ok) << "\n";
        }
    }
}

int cmd_analyze(const std::string& path, bool verdicts_only) {
    Scenario sc = scenario::load_scenario(path);
    scenario::RunRecord rec = scenario::run_analyze(sc);
    const robustness::RobustnessReport& rep = *rec.report;

    if (!verdicts_only) {
        std::cout << "scenario " << (sc.name.empty() ? "(unnamed)" : sc.name) << " (hash "
                  << rec.hash << ")\n";
        std::cout << "r_multi = " << fmt(rep.resistance.r_multi) << "  r_star = "
                  << fmt(rep.resistance.r_star) << "  r_tot = " << fmt(rep.resistance.r_tot)
                  << "  argmax edge " << graph::edge_label(rep.resistance.argmax_edge) << "\n";
        std::cout << "gap = " << fmt(rep.gap) << "  K_Delta = " << fmt(rep.k_delta)
                  << "  rho_ct = " << fmt(rep.rho_ct) << "  rho_star = " << fmt(rep.rho_star)
                  << "\n";
        std::cout << "eps_star = " << fmt(rep.eps_star.value) << "  2/lambda_n = "
                  << fmt(rep.eps_star.two_over_lambda_n) << "\n";
    }
    print_certificates(rep);
    std::cout << "overall: " << passfail(rec.all_pass) << "\n";

    if (!verdicts_only) {
        std::filesystem::path report = out_path(sc, "_report.json");
        scenario::atomic_write(report, scenario::run_record_json(rec).dump(2) + "\n");
        std::cout << "report written to " << report.string() << "\n";
    }
    return rec.all_pass ? 0 : 2;
}

int cmd_simulate(const std::string& path, bool plot, std::optional<std::uint64_t> seed) {
    Scenario sc = scenario::load_scenario(path);
    scenario::SimulationRun run = scenario::run_simulate(sc, seed);
    const sim::Verdict& v = run.trajectory.verdict;

    std::cout << "scenario " << (sc.name.empty() ? "(unnamed)" : sc.name) << " (hash "
              << run.record.hash << ")\n";
    std::cout << "verdict: " << sim::to_string(v.kind) << "  final disagreement = "
              << fmt(v.disagreement_final) << "\n";
    if (v.kind == sim::VerdictKind::Converged) {
        std::cout << "limit =";
        for (Eigen::Index i = 0; i < v.limit.size(); ++i) std::cout << " " << fmt(v.limit(i));
        std::cout << "\n";
    }
    if (!std::isnan(v.escape_time))
        std::cout << "escape time = " << fmt(v.escape_time) << "\n";

    std::filesystem::path csv = out_path(sc, "_trajectory.csv");
    scenario::atomic_write(csv, scenario::trajectory_csv(run.trajectory));
    std::cout << "trajectory written to " << csv.string() << " ("
              << run.trajectory.times.size() << " samples)\n";
    std::filesystem::path verdict = out_path(sc, "_verdict.json");
    scenario::atomic_write(verdict, scenario::run_record_json(run.record).dump(2) + "\n");
    std::cout << "verdict written to " << verdict.string() << "\n";
    if (plot) {
        std::filesystem::path svg = out_path(sc, "_trajectory.svg");
        scenario::atomic_write(svg, scenario::trajectory_svg(run.trajectory));
        std::cout << "plot written to " << svg.string() << "\n";
    }
    return 0;
}

int cmd_reproduce(bool as_json, std::optional<double> epsilon, const std::string& emit_dir) {
    if (!emit_dir.empty()) {
        for (const auto& path : scenario::emit_benchmark_scenarios(emit_dir))
            std::cout << "wrote " << path.string() << "\n";
        return 0;
    }

    scenario::ReproduceSummary summary = scenario::run_reproduce(epsilon);
    if (as_json) {
        std::cout << scenario::reproduce_json(summary).dump(2) << "\n";
    } else {
        std::printf("%-8s %-8s %-5s %-10s %-10s %-6s %s\n", "design", "attack", "mode", "verdict",
                    "expected", "match", "note");
        for (const auto& cell : summary.cells)
            std::printf("K=%-6s E%-7d %-5s %-10s %-10s %-6s %s\n", fmt(cell.gain).c_str(),
                        cell.variant, cell.mode.c_str(), sim::to_string(cell.verdict.kind),
                        sim::to_string(cell.expected), cell.match ? "yes" : "NO",
                        cell.note.c_str());
        std::cout << "anchors: rho(K1,E1) = " << fmt(summary.rho_k1_e1) << "  rho(K2,E2) = "
                  << fmt(summary.rho_k2_e2) << "  eps*(E1) = " << fmt(summary.eps_star_e1)
                  << "  eps*(E2) = " << fmt(summary.eps_star_e2) << "  "
                  << passfail(summary.anchors_ok) << "\n";
        std::cout << "grid: " << (summary.all_match ? "all cells match" : "MISMATCH") << "\n";
    }
    return summary.all_match ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted consensus networks: robustness certificates and simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", sbdc::version);

    std::string analyze_path, certify_path, simulate_path, emit_dir;
    bool plot = false, as_json = false;
    std::uint64_t seed = 0;
    double epsilon = 0.0;

    CLI::App* analyze = app.add_subcommand("analyze", "run the certificate sweep and write a report");
    analyze->add_option("scenario", analyze_path, "scenario JSON file")->required();

    CLI::App* certify = app.add_subcommand("certify", "print certificate verdicts only");
    certify->add_option("scenario", certify_path, "scenario JSON file")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "integrate the scenario dynamics");
    simulate->add_option("scenario", simulate_path, "scenario JSON file")->required();
    simulate->add_flag("--plot", plot, "also write an SVG time-series plot");
    CLI::Option* seed_opt =
        simulate->add_option("--seed", seed, "override the scenario seed for random states");

    CLI::App* reproduce = app.add_subcommand("reproduce", "re-run the published benchmark grid");
    reproduce->add_flag("--json", as_json, "machine-readable summary");
    CLI::Option* eps_opt =
        reproduce->add_option("--epsilon", epsilon, "override the discrete step size");
    reproduce->add_option("--emit-scenarios", emit_dir,
                          "write the grid scenario files to DIR and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*analyze) return cmd_analyze(analyze_path, false);
        if (*certify) return cmd_analyze(certify_path, true);
        if (*simulate)
            return cmd_simulate(simulate_path, plot,
                                seed_opt->count() ? std::optional<std::uint64_t>(seed)
                                                  : std::nullopt);
        if (*reproduce)
            return cmd_reproduce(as_json,
                                 eps_opt->count() ? std::optional<double>(epsilon) : std::nullopt,
                                 emit_dir);
    } catch (const sbdc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
