/*
 * Physical coefficients of the coupled thermo-poroelastic model, the
 * derived quantities entering the mixed formulation, the admissibility
 * constraints on them, and the compliance-tensor algebra.
 *
 * All tensors are constant 2x2 SPD matrices (homogeneous medium, d = 2).
 */

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace tpfem {

/*
 * Coefficients of the model:
 *   a0     effective thermal capacity
 *   b0     thermal dilation coefficient
 *   c0     specific storage coefficient
 *   alpha  Biot-Willis constant
 *   beta   thermal stress coefficient
 *   mu, lambda  Lame parameters
 *   K      permeability over fluid viscosity
 *   Theta  effective thermal conductivity
 *
 * beta = b0 = 0 is admitted as the degenerate (isothermal Biot) limit;
 * the remaining scalars must be strictly positive.
 */
struct MaterialParams
{
    double a0{1.0};
    double b0{0.05};
    double c0{1.0};
    double alpha{0.1};
    double beta{0.1};
    double mu{1.0};
    double lambda{1.0};
    Eigen::Matrix2d K{Eigen::Matrix2d::Identity()};
    Eigen::Matrix2d Theta{Eigen::Matrix2d::Identity()};
};

// Quantities induced by substituting the stress trace identity into the
// pressure and temperature balances.
struct DerivedCoeffs
{
    double c_r; // alpha^2 / (mu + lambda)
    double b_r; // b0 - alpha*beta / (mu + lambda)
    double a_r; // beta^2 / (mu + lambda)
    double xi;  // theta_M * (mu + lambda) / (alpha*beta); +inf when beta = 0
};

// Extremal eigenvalues of K^{-1} and Theta^{-1} (closed-form 2x2 spectra).
struct SpectralBounds
{
    double k_m, k_M;         // min/max eigenvalue of K^{-1}
    double theta_m, theta_M; // min/max eigenvalue of Theta^{-1}
};

// Margins of the three admissibility inequalities. Margins are reported,
// not just booleans, so near-boundary parameter sets are visible.
struct ConstraintReport
{
    double margin1; // b0 - alpha*beta/(mu+lambda)
    double margin2; // c0 - c_r/2 - b0 - 1/(6(mu+lambda))
    double margin3; // a0 - a_r/2 - b0 - 1/(6(mu+lambda))
    bool pass1, pass2, pass3;
    bool pass; // all three margins strictly positive
};

// Returns human-readable violations; empty means the parameter set is usable.
std::vector<std::string> validate(const MaterialParams& p);

// Throws std::invalid_argument listing all violations.
void require_valid(const MaterialParams& p);

DerivedCoeffs derived_coeffs(const MaterialParams& p);

SpectralBounds spectral_bounds(const MaterialParams& p);

ConstraintReport check_constraints(const MaterialParams& p);

// Min/max eigenvalue of a symmetric 2x2 matrix, closed form.
std::pair<double, double> sym_eigenvalue_bounds(const Eigen::Matrix2d& M);

// A tau = (1/2mu) (tau - [lambda / (2(mu+lambda))] tr(tau) I).
Eigen::Matrix2d compliance_apply(const Eigen::Matrix2d& tau, const MaterialParams& p);

// Pointwise contraction A tau1 : tau2.
double compliance_contract(const Eigen::Matrix2d& tau1, const Eigen::Matrix2d& tau2,
                           const MaterialParams& p);

// Integral of A tau1 : tau2 for piecewise-constant tensor fields given the
// element areas. Field sizes must match the area list.
double compliance_inner(const std::vector<Eigen::Matrix2d>& tau1,
                        const std::vector<Eigen::Matrix2d>& tau2,
                        const std::vector<double>& areas,
                        const MaterialParams& p);

} // namespace tpfem
