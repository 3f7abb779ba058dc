/*
 * Discrete spaces and degree-of-freedom maps.
 *
 * Fields and their elements on a triangulation:
 *   T, p, rho  piecewise constants, one DOF per triangle
 *   w, r       lowest-order H(div) edge elements, one DOF per edge
 *   sigma      two independent H(div) rows, two DOFs per edge
 *   u          piecewise-constant vectors, two DOFs per triangle
 *
 * Flux basis functions are normalized to unit flux across their edge with
 * respect to the edge's global normal, so divergence pairings against
 * piecewise constants are exactly +-1.
 */

#pragma once

#include "tpfem/mesh.hpp"

#include <Eigen/Dense>

#include <functional>

namespace tpfem {

using ScalarFn = std::function<double(double, double)>;
using VectorFn = std::function<Eigen::Vector2d(double, double)>;

struct SpaceLayout
{
    // Counts and contiguous offsets in field order T, r, p, w, sigma, u, rho.
    int n_T, n_r, n_p, n_w, n_sigma, n_u, n_rho;
    int off_T, off_r, off_p, off_w, off_sigma, off_u, off_rho;
    int total;
};

SpaceLayout build_layout(const TriMesh& mesh);

// Triangle quadrature: points in barycentric coordinates with weights
// summing to 1. Degree 2 is the 3-point edge-midpoint rule; degree 4 is a
// 6-point rule. Used as: integral ~= area * sum_q weight_q * f(x_q).
struct TriQuadrature
{
    std::vector<Eigen::Vector3d> bary;
    std::vector<double> weights;
};

const TriQuadrature& tri_quadrature(int degree);

// Physical quadrature points of a rule on one triangle.
std::vector<Eigen::Vector2d> quadrature_points(const TriMesh& mesh, int k,
                                               const TriQuadrature& quad);

// Cell averages (3-point edge-midpoint rule, exact through degree 2).
Eigen::VectorXd project_P0(const TriMesh& mesh, const ScalarFn& f);

// Flux DOFs: integral of v . n over each edge against the global normal
// (2-point Gauss per edge, exact through degree 3).
Eigen::VectorXd interpolate_Hdiv(const TriMesh& mesh, const VectorFn& v);

// Basis of the H(div) edge element for local edge a of triangle k at x,
// including the global orientation sign: phi = sign * (x - P_opp) / (2|K|).
Eigen::Vector2d rt0_basis(const TriMesh& mesh, int k, int a, const Eigen::Vector2d& x);

// Constant elementwise divergence of that basis: sign / |K|.
double rt0_div(const TriMesh& mesh, int k, int a);

// Integral of the basis over its triangle: sign * (centroid - P_opp) / 2.
Eigen::Vector2d rt0_cell_integral(const TriMesh& mesh, int k, int a);

// Value of an edge-coefficient flux field on triangle k at point x.
Eigen::Vector2d rt0_eval(const TriMesh& mesh, const Eigen::VectorXd& coeffs, int k,
                         const Eigen::Vector2d& x);

// L2 norms of discrete fields. P0 fields may hold one (scalar) or two
// (vector, interleaved x0,y0,x1,y1,...) DOFs per triangle.
double norm_P0(const TriMesh& mesh, const Eigen::VectorXd& coeffs);
double norm_RT0(const TriMesh& mesh, const Eigen::VectorXd& coeffs);

// L2 norm of the elementwise divergence of a flux field.
double norm_RT0_div(const TriMesh& mesh, const Eigen::VectorXd& coeffs);

} // namespace tpfem
