/*
 * Command-line driver for the coupled solver and its verification suite.
 *
 * Subcommands: check-params, pencil-check, run, mms, biot-check.
 * Exit codes: 0 success, 1 failed assertion or solver failure,
 * 2 configuration error. All output files start with the resolved config
 * as '# key=value' header lines. TPFEM_OUTPUT_DIR overrides the config's
 * output directory; --output-dir overrides both.
 */

#include "tpfem/config.hpp"
#include "tpfem/verification.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace tpfem;

std::ofstream open_output(const RunConfig& cfg, const std::string& name)
{
    std::filesystem::create_directories(cfg.output_dir);
    const auto path = std::filesystem::path(cfg.output_dir) / name;
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open output file " + path.string());
    write_config(cfg, os, "# ");
    os.precision(12);
    return os;
}

// Returns exit code 2 material: parameter validity is a configuration
// matter, admissibility is only a warning.
void warn_constraints(const MaterialParams& params)
{
    const auto violations = validate(params);
    if (!violations.empty()) {
        std::string what = "invalid parameters:";
        for (const auto& v : violations)
            what += "\n  " + v;
        throw ConfigError(what);
    }
    const ConstraintReport rep = check_constraints(params);
    if (!rep.pass)
        std::cout << "warning: admissibility constraints violated (margins "
                  << rep.margin1 << ", " << rep.margin2 << ", " << rep.margin3
                  << ")\n";
}

SimSetup setup_from(const RunConfig& cfg, const ManufacturedCase* mc)
{
    SimSetup setup;
    setup.n = cfg.n;
    setup.T_f = cfg.T_f;
    setup.dt = cfg.dt;
    setup.params = cfg.params;
    setup.tol = cfg.tol;
    setup.max_iters = cfg.max_iters;
    if (mc) {
        setup.sources = mc->sources;
        setup.p0 = [mc](double x, double y) { return mc->p(x, y, 0.0); };
        setup.T0 = [mc](double x, double y) { return mc->T(x, y, 0.0); };
        setup.u0 = [mc](double x, double y) { return mc->u(x, y, 0.0); };
    }
    return setup;
}

int cmd_check_params(const RunConfig& cfg)
{
    const auto violations = validate(cfg.params);
    if (!violations.empty()) {
        for (const auto& v : violations)
            std::cout << "invalid: " << v << "\n";
        return 2;
    }
    const ConstraintReport rep = check_constraints(cfg.params);
    std::cout.precision(12);
    std::cout << "margin1 (b_r = b0 - alpha*beta/(mu+lambda))        = " << rep.margin1
              << (rep.pass1 ? "  ok" : "  VIOLATED") << "\n"
              << "margin2 (c0 - c_r/2 - b0 - 1/(6(mu+lambda)))       = " << rep.margin2
              << (rep.pass2 ? "  ok" : "  VIOLATED") << "\n"
              << "margin3 (a0 - a_r/2 - b0 - 1/(6(mu+lambda)))       = " << rep.margin3
              << (rep.pass3 ? "  ok" : "  VIOLATED") << "\n"
              << (rep.pass ? "PASS" : "FAIL") << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_pencil_check(const RunConfig& cfg)
{
    warn_constraints(cfg.params);
    const TriMesh mesh = build_structured(cfg.n);
    const std::vector<Eigen::Vector2d> eta_zero;
    const std::vector<Eigen::Vector2d> eta_one{Eigen::Vector2d(1.0, 0.5)};

    bool any_nonsingular = false;
    for (double s : cfg.s_values) {
        const PencilReport without =
            pencil_check(mesh, cfg.params, eta_zero, s, cfg.seed);
        const PencilReport with = pencil_check(mesh, cfg.params, eta_one, s, cfg.seed);
        std::cout << "-- transport off --\n";
        print_pencil_report(without, std::cout);
        std::cout << "-- transport (1, 0.5) --\n";
        print_pencil_report(with, std::cout);
        if (without.factorized && with.factorized)
            any_nonsingular = true;
    }
    // The theory claims existence of a regular shift, not regularity of
    // every probed shift.
    return any_nonsingular ? 0 : 1;
}

int cmd_run(const RunConfig& cfg)
{
    warn_constraints(cfg.params);
    ManufacturedCase mc;
    const bool use_mms = cfg.case_name == "mms";
    if (use_mms)
        mc = manufactured_case(cfg.params);
    const SimSetup setup = setup_from(cfg, use_mms ? &mc : nullptr);

    const RunResult result = run_simulation(setup);
    const TriMesh& mesh = result.mesh;

    std::ofstream steps = open_output(cfg, "steps.csv");
    steps << "step,t,picard_iters,err_r_last,norm_T,norm_p,norm_u,norm_w,norm_r,"
             "norm_sigma,dissipation\n";
    const int E = mesh.num_edges();
    for (std::size_t i = 0; i < result.states.size(); ++i) {
        const State& st = result.states[i];
        const Eigen::VectorXd sig = st.sigma();
        const double nsig = std::sqrt(
            std::pow(norm_RT0(mesh, sig.head(E)), 2)
            + std::pow(norm_RT0(mesh, sig.tail(E)), 2));
        steps << i << ',' << st.t << ','
              << (i ? result.logs[i - 1].iterations : 0) << ','
              << (i ? result.logs[i - 1].err_r.back() : 0.0) << ','
              << norm_P0(mesh, st.T()) << ',' << norm_P0(mesh, st.p()) << ','
              << norm_P0(mesh, st.u()) << ',' << norm_RT0(mesh, st.w()) << ','
              << norm_RT0(mesh, st.r()) << ',' << nsig << ','
              << dissipation_energy(mesh, cfg.params, st) << "\n";
    }

    const State& last = result.states.back();
    std::ofstream tri = open_output(cfg, "fields_tri.txt");
    tri << "# triangle cx cy T p ux uy rho\n";
    for (int k = 0; k < mesh.num_triangles(); ++k)
        tri << k << ' ' << mesh.tri_centroids[k].x() << ' '
            << mesh.tri_centroids[k].y() << ' ' << last.T()[k] << ' '
            << last.p()[k] << ' ' << last.u()[2 * k] << ' ' << last.u()[2 * k + 1]
            << ' ' << last.rho()[k] << "\n";

    std::ofstream edge = open_output(cfg, "fields_edge.txt");
    edge << "# edge mx my w r sigma_row1 sigma_row2\n";
    for (int e = 0; e < E; ++e) {
        const Eigen::Vector2d mid =
            0.5 * (mesh.vertices[mesh.edge_vertices[e][0]]
                   + mesh.vertices[mesh.edge_vertices[e][1]]);
        edge << e << ' ' << mid.x() << ' ' << mid.y() << ' ' << last.w()[e] << ' '
             << last.r()[e] << ' ' << last.sigma()[e] << ' ' << last.sigma()[E + e]
             << "\n";
    }

    std::cout << result.states.size() - 1 << " steps, "
              << "initial displacement discrepancy " << result.init.u_discrepancy
              << "\n";
    print_contraction_report(contraction_report(result.logs, cfg.params, cfg.T_f),
                             std::cout);
    print_energy_report(
        energy_report(result, cfg.params, setup.sources, setup.p0, setup.T0),
        std::cout);
    return 0;
}

int cmd_mms(const RunConfig& cfg)
{
    warn_constraints(cfg.params);
    const ManufacturedCase mc = manufactured_case(cfg.params);
    const ErrorTable table = convergence_study(mc, cfg.levels, cfg.T_f, cfg.dt_over_h,
                                               cfg.tol, cfg.max_iters);
    std::ofstream csv = open_output(cfg, "mms_errors.csv");
    write_error_table_csv(table, csv);
    print_error_table(table, std::cout);
    return table.complete ? 0 : 1;
}

int cmd_biot_check(const RunConfig& cfg)
{
    RunConfig reduced = cfg;
    reduced.params.beta = 0.0;
    reduced.params.b0 = 0.0;
    warn_constraints(reduced.params);
    const ManufacturedCase mc = manufactured_case(reduced.params);
    SimSetup setup = setup_from(reduced, &mc);
    // Nonzero initial data exercises the init equilibrium as well.
    setup.p0 = [](double x, double y) {
        return std::sin(3.14159265358979323846 * x) * std::sin(3.14159265358979323846 * y);
    };
    setup.T0 = setup.p0;

    const double disc = biot_recovery_test(setup);
    std::cout << "max (p, w, sigma, u) discrepancy vs reduced poroelastic solve: "
              << disc << "\n";
    const bool ok = disc <= 1e-10;
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mixed finite-element solver for coupled thermo-poroelasticity "
                 "with convective transport"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    unsigned seed = 0;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--output-dir", output_dir,
                   "output directory (overrides config and TPFEM_OUTPUT_DIR)");
    auto* seed_opt =
        app.add_option("--seed", seed, "seed for randomized probes (overrides config)");

    auto* check = app.add_subcommand("check-params",
                                     "evaluate the admissibility margins");
    auto* pencil = app.add_subcommand(
        "pencil-check", "probe pencil regularity at the configured shifts");
    auto* run = app.add_subcommand("run", "time-step the coupled system");
    auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
    auto* biot = app.add_subcommand(
        "biot-check", "decoupling consistency against a reduced poroelastic solve");
    // Let --config/--output-dir/--seed be written after the subcommand too.
    for (auto* sub : {check, pencil, run, mms, biot})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg =
            config_path.empty() ? RunConfig{} : parse_config_file(config_path);
        if (const char* env = std::getenv("TPFEM_OUTPUT_DIR"))
            cfg.output_dir = env;
        if (!output_dir.empty())
            cfg.output_dir = output_dir;
        if (seed_opt->count() > 0)
            cfg.seed = seed;

        if (check->parsed())
            return cmd_check_params(cfg);
        if (pencil->parsed())
            return cmd_pencil_check(cfg);
        if (run->parsed())
            return cmd_run(cfg);
        if (mms->parsed())
            return cmd_mms(cfg);
        if (biot->parsed())
            return cmd_biot_check(cfg);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const PicardDivergence& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
