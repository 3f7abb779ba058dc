#include "tpfem/solver.hpp"

#include <cmath>
#include <iostream>

namespace tpfem {

namespace {

// L2 norm of the difference of two flux coefficient vectors.
double flux_diff_norm(const TriMesh& mesh, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return norm_RT0(mesh, (a - b).eval());
}

double p0_diff_norm(const TriMesh& mesh, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return norm_P0(mesh, (a - b).eval());
}

double sup_centroid_norm(const TriMesh& mesh, const Eigen::VectorXd& flux_coeffs)
{
    double sup = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k)
        sup = std::max(sup, rt0_eval(mesh, flux_coeffs, k, mesh.tri_centroids[k]).norm());
    return sup;
}

double sup_eta_norm(const std::vector<Eigen::Vector2d>& eta)
{
    double sup = 0.0;
    for (const auto& e : eta)
        sup = std::max(sup, e.norm());
    return sup;
}

} // namespace

void StepSolver::factorize(const SpMat& M)
{
    if (!analyzed_) {
        lu_.analyzePattern(M);
        analyzed_ = true;
    }
    lu_.factorize(M);
    if (lu_.info() != Eigen::Success)
        throw std::runtime_error("step factorization failed (near-singular system); "
                                 "run the pencil diagnostic");
}

Eigen::VectorXd StepSolver::solve(const Eigen::VectorXd& rhs) const
{
    return lu_.solve(rhs);
}

State consistent_init(const TriMesh& mesh, const MaterialParams& params,
                      const ScalarFn& p0, const ScalarFn& T0, const VectorFn& u0,
                      const Sources& sources, InitReport* report)
{
    const Eigen::VectorXd zero_flux = Eigen::VectorXd::Zero(mesh.num_edges());
    const BlockSystem sys = assemble_system(mesh, params, zero_flux, sources, 0.0);
    const SpaceLayout& l = sys.layout;
    const int E = mesh.num_edges();
    const int F = mesh.num_triangles();

    State state(l, 0.0);
    state.T() = project_P0(mesh, T0);
    state.p() = project_P0(mesh, p0);

    // Flux laws: A_ww W = A_wp P and A_rr R = A_rT T.
    Eigen::SimplicialLDLT<SpMat> ldlt_w(sys.A_ww);
    Eigen::SimplicialLDLT<SpMat> ldlt_r(sys.A_rr);
    if (ldlt_w.info() != Eigen::Success || ldlt_r.info() != Eigen::Success)
        throw std::runtime_error("consistent_init: flux mass factorization failed");
    state.w() = ldlt_w.solve(sys.A_wp * state.p());
    state.r() = ldlt_r.solve(sys.A_rT * state.T());

    // Coupled equilibrium for (sigma, u, rho):
    //   A_ss S + A_us^T U + A_rot^T R = -A_ps^T P - A_Ts^T T
    //   A_us S                        = -L_u
    //   A_rot S                       = 0
    const int dim = 2 * E + 2 * F + F;
    std::vector<Eigen::Triplet<double>> t;
    auto add = [&t](const SpMat& B, int roff, int coff, double scale, bool transpose) {
        for (int col = 0; col < B.outerSize(); ++col)
            for (SpMat::InnerIterator it(B, col); it; ++it) {
                const int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
                const int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
                t.emplace_back(roff + r, coff + c, scale * it.value());
            }
    };
    add(sys.A_ss, 0, 0, 1.0, false);
    add(sys.A_us, 0, 2 * E, 1.0, true);
    add(sys.A_rot, 0, 2 * E + 2 * F, 1.0, true);
    add(sys.A_us, 2 * E, 0, 1.0, false);
    add(sys.A_rot, 2 * E + 2 * F, 0, 1.0, false);
    SpMat saddle(dim, dim);
    saddle.setFromTriplets(t.begin(), t.end());

    Eigen::VectorXd rhs(dim);
    rhs.segment(0, 2 * E) =
        -(sys.A_ps.transpose() * state.p()) - (sys.A_Ts.transpose() * state.T());
    rhs.segment(2 * E, 2 * F) = -sys.L.segment(l.off_u, l.n_u);
    rhs.segment(2 * E + 2 * F, F).setZero();

    Eigen::SparseLU<SpMat> lu(saddle);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error(
            "consistent_init: singular algebraic subsystem (broken element pairing)");
    const Eigen::VectorXd sol = lu.solve(rhs);

    state.sigma() = sol.segment(0, 2 * E);
    state.u() = sol.segment(2 * E, 2 * F);
    state.rho() = sol.segment(2 * E + 2 * F, F);

    if (report) {
        Eigen::VectorXd u_data(2 * F);
        const Eigen::VectorXd ux = project_P0(mesh, [&u0](double x, double y) {
            return u0(x, y).x();
        });
        const Eigen::VectorXd uy = project_P0(mesh, [&u0](double x, double y) {
            return u0(x, y).y();
        });
        for (int k = 0; k < F; ++k) {
            u_data[2 * k] = ux[k];
            u_data[2 * k + 1] = uy[k];
        }
        report->u_discrepancy = norm_P0(mesh, (state.u() - u_data).eval());
    }
    return state;
}

State picard_step(const TriMesh& mesh, const MaterialParams& params,
                  const State& prev_time, const State& prev_iter, double dt, double t,
                  const Sources& sources, const std::vector<Eigen::Vector2d>* eta_override,
                  const BlockSystem* skeleton, StepSolver* cache)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("picard_step: dt must be positive");

    const std::vector<Eigen::Vector2d> eta =
        eta_override ? *eta_override
                     : frozen_transport(mesh, params, prev_iter.r());

    // Iterate-independent blocks come from the skeleton when available.
    BlockSystem local;
    const BlockSystem* base = skeleton;
    if (!base) {
        local = assemble_system(mesh, params, Eigen::VectorXd::Zero(mesh.num_edges()),
                                zero_sources(), 0.0);
        base = &local;
    }
    const SpaceLayout& l = base->layout;

    const SpMat psi = psi_with_transport(*base, mesh, eta, nullptr);
    SpMat M = (1.0 / dt) * base->Phi;
    M += psi;

    const Eigen::VectorXd L = assemble_load(mesh, l, sources, t);
    const Eigen::VectorXd rhs = L + (1.0 / dt) * (base->Phi * prev_time.X);

    State next(l, t);
    if (cache) {
        cache->factorize(M);
        next.X = cache->solve(rhs);
    } else {
        StepSolver solver;
        solver.factorize(M);
        next.X = solver.solve(rhs);
    }
    return next;
}

std::pair<State, PicardLog> backward_euler_step(
    const TriMesh& mesh, const MaterialParams& params, const State& prev, double dt,
    double t, const Sources& sources, double tol, int max_iters, TransportMode mode,
    const std::vector<Eigen::Vector2d>* eta_frozen, const BlockSystem* skeleton,
    StepSolver* cache)
{
    if (!(tol > 0.0))
        throw std::invalid_argument("backward_euler_step: tol must be positive");
    if (max_iters < 1)
        throw std::invalid_argument("backward_euler_step: max_iters must be >= 1");

    std::vector<Eigen::Vector2d> eta_fixed;
    if (mode == TransportMode::none)
        eta_fixed.assign(mesh.num_triangles(), Eigen::Vector2d::Zero());
    else if (mode == TransportMode::frozen) {
        if (!eta_frozen)
            throw std::invalid_argument("backward_euler_step: frozen mode needs a field");
        eta_fixed = *eta_frozen;
        if (eta_fixed.size() == 1)
            eta_fixed.assign(mesh.num_triangles(), (*eta_frozen)[0]);
    }

    PicardLog log;
    State iterate = prev; // iterate 0 supplies r^0 = previous-level flux
    for (int m = 1; m <= max_iters; ++m) {
        const std::vector<Eigen::Vector2d> eta =
            mode == TransportMode::picard
                ? frozen_transport(mesh, params, iterate.r())
                : eta_fixed;
        State next = picard_step(mesh, params, prev, iterate, dt, t, sources, &eta,
                                 skeleton, cache);

        log.err_r.push_back(flux_diff_norm(mesh, next.r(), iterate.r()));
        log.err_w.push_back(flux_diff_norm(mesh, next.w(), iterate.w()));
        log.err_p.push_back(p0_diff_norm(mesh, next.p(), iterate.p()));
        log.err_T.push_back(p0_diff_norm(mesh, next.T(), iterate.T()));
        log.sup_w.push_back(sup_centroid_norm(mesh, next.w()));
        log.sup_eta.push_back(sup_eta_norm(eta));
        log.iterations = m;

        const double err = log.err_r.back();
        iterate = std::move(next);
        if (err <= tol * (1.0 + norm_RT0(mesh, iterate.r()))) {
            log.converged = true;
            break;
        }
    }
    if (!log.converged)
        throw PicardDivergence(log);
    return {std::move(iterate), std::move(log)};
}

RunResult run_simulation(const SimSetup& setup)
{
    require_valid(setup.params);
    // T_f = 0 is a zero-step request: the march degenerates to the
    // consistent initial state alone.
    if (setup.n < 1 || setup.T_f < 0.0 || !(setup.dt > 0.0) || !(setup.tol > 0.0))
        throw std::invalid_argument("run_simulation: invalid setup");

    RunResult result;
    result.mesh = build_structured(setup.n);
    const TriMesh& mesh = result.mesh;

    const auto constraints = check_constraints(setup.params);
    if (!constraints.pass)
        std::cerr << "warning: admissibility constraints violated (margins "
                  << constraints.margin1 << ", " << constraints.margin2 << ", "
                  << constraints.margin3 << "); proceeding outside the dissipative regime\n";

    const BlockSystem skeleton = assemble_system(
        mesh, setup.params, Eigen::VectorXd::Zero(mesh.num_edges()), zero_sources(), 0.0);

    result.states.push_back(consistent_init(mesh, setup.params, setup.p0, setup.T0,
                                            setup.u0, setup.sources, &result.init));

    StepSolver cache;
    double t = 0.0;
    while (t < setup.T_f - 1e-12 * setup.T_f) {
        const double t_next = std::min(t + setup.dt, setup.T_f);
        auto [state, log] = backward_euler_step(
            mesh, setup.params, result.states.back(), t_next - t, t_next, setup.sources,
            setup.tol, setup.max_iters, setup.transport,
            setup.eta_frozen.empty() ? nullptr : &setup.eta_frozen, &skeleton, &cache);
        result.states.push_back(std::move(state));
        result.logs.push_back(std::move(log));
        t = t_next;
    }
    return result;
}

} // namespace tpfem
