/*
 * Manufactured-solution harness: closed-form analytic fields with their
 * induced sources, error measurement against discrete states, nested-mesh
 * convergence studies, and the poroelastic decoupling consistency check.
 */

#pragma once

#include "tpfem/diagnostics.hpp"

namespace tpfem {

using SpaceTimeScalar = std::function<double(double, double, double)>;
using SpaceTimeVector = std::function<Eigen::Vector2d(double, double, double)>;
using SpaceTimeMatrix = std::function<Eigen::Matrix2d(double, double, double)>;

// Closed-form solution of the strong system. The primal fields (T, p, u)
// vanish on the boundary; w, r, sigma follow from the constitutive laws
//   w = -K grad p,  r = -Theta grad T,
//   sigma = 2 mu eps(u) + lambda (div u) I - alpha p I - beta T I,
// and the sources g, h, f from substituting everything into the balance
// equations (h includes the convective contribution -grad T . (K grad p)).
struct ManufacturedCase
{
    MaterialParams params;
    SpaceTimeScalar T, p;
    SpaceTimeVector u;
    SpaceTimeScalar div_u;
    SpaceTimeVector w, r;
    SpaceTimeMatrix sigma;
    SpaceTimeScalar rho; // rotation multiplier, (d2 u1 - d1 u2)/2
    Sources sources;
    SpaceTimeVector f_t; // time derivative of the body force
};

// T = p = t sin(pi x) sin(pi y), u = t (s, s) with sources induced by the
// given parameters.
ManufacturedCase manufactured_case(const MaterialParams& params);

// The same fields over an admissibility-satisfying preset with anisotropic
// K and Theta.
ManufacturedCase default_case();

// State assembled from projections of the analytic fields at time t:
// cell averages for T, p, u, rho; edge-flux interpolation for w, r, and
// the stress rows.
State project_exact(const TriMesh& mesh, const ManufacturedCase& mc, double t);

// L2 errors of one discrete state against the analytic fields at the
// state's time, via degree-4 quadrature; etr is the trace-identity
// residual against the exact divergence.
struct FieldErrors
{
    double eT = 0.0, ep = 0.0, eu = 0.0, ew = 0.0, er = 0.0, esigma = 0.0, etr = 0.0;
};

FieldErrors measure_errors(const TriMesh& mesh, const MaterialParams& params,
                           const State& state, const ManufacturedCase& mc);

// Per-level final-time errors and observed rates of a refinement study.
// rates[i] = log2(e[i-1]/e[i]); the first row is NaN (undefined).
struct ErrorTable
{
    std::vector<int> levels;
    std::vector<double> h, dt;
    std::vector<FieldErrors> errors;
    std::vector<FieldErrors> rates;
    std::vector<double> st_eT, st_ep; // space-time L2(L2) errors (secondary)
    bool complete = false;            // false when a level failed to converge
};

// Runs the nonlinear solver per level with dt = dt_over_h * (1/n). A level
// whose fixed-point loop diverges stops the study; the partial table is
// returned with complete = false.
ErrorTable convergence_study(const ManufacturedCase& mc, const std::vector<int>& levels,
                             double T_f, double dt_over_h = 0.25, double tol = 1e-10,
                             int max_iters = 50);

// CSV with the fixed header
// level,h,dt,eT,ep,eu,ew,er,esigma,etr,rate_T,...,rate_tr.
void write_error_table_csv(const ErrorTable& table, std::ostream& os);
void print_error_table(const ErrorTable& table, std::ostream& os);

// With beta = b0 = 0 the pressure-mechanics half decouples from the energy
// equation. Runs the full solver and a reduced march with the thermal rows
// and columns deleted, and returns the maximum L2 discrepancy over all time
// levels across p, w, sigma, u. Throws unless beta = b0 = 0.
double biot_recovery_test(const SimSetup& setup);

} // namespace tpfem
