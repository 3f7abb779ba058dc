/*
 * Implicit-Euler time stepping of the semi-discrete system with fixed-point
 * resolution of the convective nonlinearity.
 *
 * Each time step solves
 *
 *   (Phi/dt + Psi(eta^{m-1})) X^m = L(t) + Phi X_old / dt,
 *
 * where eta^{m-1} is the transport field frozen at the previous iterate's
 * heat flux, until the flux difference ||r^m - r^{m-1}|| satisfies a
 * relative-plus-absolute tolerance. The accumulation operator Phi reads
 * only the p, sigma, T components of X_old, so those three fields are the
 * ones that matter in the initial state.
 */

#pragma once

#include "tpfem/assembly.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>
#include <vector>

namespace tpfem {

// Coefficient vectors of all discrete fields at one time level or one
// fixed-point iterate.
struct State
{
    SpaceLayout layout{};
    Eigen::VectorXd X;
    double t = 0.0;

    State() = default;
    State(const SpaceLayout& l, double time)
        : layout(l), X(Eigen::VectorXd::Zero(l.total)), t(time)
    {
    }

    auto T() const { return X.segment(layout.off_T, layout.n_T); }
    auto r() const { return X.segment(layout.off_r, layout.n_r); }
    auto p() const { return X.segment(layout.off_p, layout.n_p); }
    auto w() const { return X.segment(layout.off_w, layout.n_w); }
    auto sigma() const { return X.segment(layout.off_sigma, layout.n_sigma); }
    auto u() const { return X.segment(layout.off_u, layout.n_u); }
    auto rho() const { return X.segment(layout.off_rho, layout.n_rho); }

    auto T() { return X.segment(layout.off_T, layout.n_T); }
    auto r() { return X.segment(layout.off_r, layout.n_r); }
    auto p() { return X.segment(layout.off_p, layout.n_p); }
    auto w() { return X.segment(layout.off_w, layout.n_w); }
    auto sigma() { return X.segment(layout.off_sigma, layout.n_sigma); }
    auto u() { return X.segment(layout.off_u, layout.n_u); }
    auto rho() { return X.segment(layout.off_rho, layout.n_rho); }
};

// Per-iteration record of one time step's fixed-point loop. Difference
// norms are spatial L2 norms between successive iterates (iterate 0 is the
// previous time level).
struct PicardLog
{
    std::vector<double> err_r, err_w, err_p, err_T;
    // sup over elements of |w^m| and of |Theta^{-1} r^{m-1}| per iteration
    std::vector<double> sup_w, sup_eta;
    int iterations = 0;
    bool converged = false;
};

// Thrown when the fixed-point loop exhausts max_iters; carries the log so
// the difference ratios can diagnose non-contraction.
struct PicardDivergence : std::runtime_error
{
    PicardLog log;
    explicit PicardDivergence(PicardLog l)
        : std::runtime_error("fixed-point iteration did not converge; "
                             "consider halving dt"),
          log(std::move(l))
    {
    }
};

// Sparse direct factorization with the symbolic analysis cached: the system
// pattern is iterate-independent because the convective block always
// occupies its full incidence pattern.
class StepSolver
{
public:
    void factorize(const SpMat& M);
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

private:
    Eigen::SparseLU<SpMat> lu_;
    bool analyzed_ = false;
};

// How the convective transport field is supplied:
//   picard  frozen at the previous iterate's heat flux (the nonlinear scheme)
//   frozen  a fixed elementwise field for the whole run (linear mode)
//   none    transport disabled (eta = 0)
enum class TransportMode
{
    picard,
    frozen,
    none
};

struct InitReport
{
    // L2 distance between the equilibrium displacement and the projection
    // of the supplied initial displacement data
    double u_discrepancy = 0.0;
};

// Consistent initialization: T(0) and p(0) are cell-average projections of
// the data; all remaining fields solve the non-differentiated rows of the
// system at t = 0, so every algebraic equation holds at the initial time.
// The supplied u0 is compared against the equilibrium displacement and the
// discrepancy reported. Throws on a singular algebraic subsystem (a broken
// element pairing).
State consistent_init(const TriMesh& mesh, const MaterialParams& params,
                      const ScalarFn& p0, const ScalarFn& T0, const VectorFn& u0,
                      const Sources& sources, InitReport* report = nullptr);

// One fixed-point iterate: assembles the system with the transport field
// frozen at prev_iter's flux (or at *eta_override when given) and solves the
// implicit-Euler step equation. skeleton, when given, supplies the
// iterate-independent blocks; cache reuses the factorization pattern.
State picard_step(const TriMesh& mesh, const MaterialParams& params,
                  const State& prev_time, const State& prev_iter, double dt, double t,
                  const Sources& sources,
                  const std::vector<Eigen::Vector2d>* eta_override = nullptr,
                  const BlockSystem* skeleton = nullptr, StepSolver* cache = nullptr);

// Full implicit-Euler step: iterates picard_step from r^0 = prev.r until
// ||r^m - r^{m-1}|| <= tol (1 + ||r^m||) or max_iters. In frozen/none mode
// the map is affine and the loop exits after one extra confirming iterate.
// Throws PicardDivergence when max_iters is exhausted.
std::pair<State, PicardLog> backward_euler_step(
    const TriMesh& mesh, const MaterialParams& params, const State& prev, double dt,
    double t, const Sources& sources, double tol, int max_iters,
    TransportMode mode = TransportMode::picard,
    const std::vector<Eigen::Vector2d>* eta_frozen = nullptr,
    const BlockSystem* skeleton = nullptr, StepSolver* cache = nullptr);

struct SimSetup
{
    int n = 4;
    double T_f = 0.5;
    double dt = 0.0625;
    MaterialParams params;
    Sources sources = zero_sources();
    ScalarFn p0 = [](double, double) { return 0.0; };
    ScalarFn T0 = [](double, double) { return 0.0; };
    VectorFn u0 = [](double, double) { return Eigen::Vector2d::Zero().eval(); };
    double tol = 1e-10;
    int max_iters = 50;
    TransportMode transport = TransportMode::picard;
    // elementwise transport field for frozen mode; broadcast when size 1
    std::vector<Eigen::Vector2d> eta_frozen;
};

struct RunResult
{
    TriMesh mesh;
    std::vector<State> states; // states[0] is the initial state
    std::vector<PicardLog> logs;
    InitReport init;
};

// Fixed-step march on (0, T_f]; the last step is shortened when T_f is not
// an integer multiple of dt.
RunResult run_simulation(const SimSetup& setup);

} // namespace tpfem
