/*
 * Sparse block operators of the semi-discrete system
 *
 *   Phi dX/dt + Psi X = L,   X = (T, r, p, w, sigma, u, rho),
 *
 * where Phi carries the accumulation terms (nonzero only on the p, sigma, T
 * rows and columns) and Psi the quasi-static couplings, including the
 * linearized convective transport block frozen at a given flux iterate.
 *
 * Blocks are named by their field pair: rows of A_xy are tested against the
 * x-space, columns run over the y-space. The stress block orders the two
 * H(div) rows as [row1 edges | row2 edges].
 */

#pragma once

#include "tpfem/mesh.hpp"
#include "tpfem/params.hpp"
#include "tpfem/spaces.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>

namespace tpfem {

using SpMat = Eigen::SparseMatrix<double>;

// Time-dependent source terms of the three balance equations:
// g mass source, h heat source, f body force. Arguments (x, y, t).
struct Sources
{
    std::function<double(double, double, double)> g;
    std::function<double(double, double, double)> h;
    std::function<Eigen::Vector2d(double, double, double)> f;
};

Sources zero_sources();

struct BlockSystem
{
    SpaceLayout layout;

    SpMat A_TT;  // (a0+a_r) P0 mass
    SpMat A_pp;  // (c0+c_r) P0 mass
    SpMat A_ss;  // compliance Gram of the row-wise stress element
    SpMat A_ww;  // K^{-1}-weighted flux mass
    SpMat A_rr;  // Theta^{-1}-weighted flux mass
    SpMat A_us;  // (v, div tau)
    SpMat A_ps;  // alpha/(2(mu+lambda)) (I q, tau)
    SpMat A_Ts;  // beta/(2(mu+lambda)) (I S, tau)
    SpMat A_Tp;  // -b_r P0 mass
    SpMat A_wp;  // (div z, q)
    SpMat A_rT;  // (div y, S)
    SpMat A_wT;  // (eta . z, S), eta frozen from the previous flux iterate
    SpMat A_rot; // (as tau, zeta) weak-symmetry pairing

    SpMat Phi, Psi; // layout.total square
    Eigen::VectorXd L;

    double gamma_h = 0.0; // max elementwise |eta|
};

// Diagonal P0 mass: entry = weight * triangle area. Rejects weight <= 0.
SpMat assemble_mass_P0(const TriMesh& mesh, double weight);

// Flux mass weighted by an SPD tensor M (pass K^{-1} or Theta^{-1}).
SpMat assemble_mass_Hdiv(const TriMesh& mesh, const Eigen::Matrix2d& M);

// Divergence pairing (edge x triangle); every nonzero entry is +-1.
SpMat assemble_div(const TriMesh& mesh);

struct TraceBlocks
{
    SpMat A_ps, A_Ts, A_Tp;
};

// Couplings through the stress trace and the pressure-temperature mass.
TraceBlocks assemble_coupling_traces(const TriMesh& mesh, const MaterialParams& p);

// Rotation multiplier against the antisymmetric part sigma12 - sigma21.
SpMat assemble_weak_symmetry(const TriMesh& mesh);

// Elementwise-constant transport field eta = Theta^{-1} r(centroid) from a
// flux coefficient vector.
std::vector<Eigen::Vector2d> frozen_transport(const TriMesh& mesh, const MaterialParams& p,
                                              const Eigen::VectorXd& r_coeffs);

// Convective pairing (eta . z, S). The full edge-triangle incidence pattern
// is emitted even for zero eta so the system sparsity never changes between
// iterates. gamma_out receives max_K |eta_K| when non-null.
SpMat assemble_convective(const TriMesh& mesh, const std::vector<Eigen::Vector2d>& eta,
                          double* gamma_out = nullptr);

// Load vector (g, q) + (h, S) + (f, v) at time t in the global layout.
Eigen::VectorXd assemble_load(const TriMesh& mesh, const SpaceLayout& layout,
                              const Sources& sources, double t);

// Full system at time t with the convective block frozen at r_frozen.
// A violated admissibility constraint warns on `warn` (when non-null) and
// proceeds.
BlockSystem assemble_system(const TriMesh& mesh, const MaterialParams& p,
                            const Eigen::VectorXd& r_frozen, const Sources& sources,
                            double t, std::ostream* warn = nullptr);

// Psi of a skeleton system (assembled with a zero transport field) with the
// convective block replaced by the one for eta. The skeleton's convective
// entries are explicit zeros on exactly the needed pattern, so the sparsity
// is unchanged. gamma_out receives max_K |eta_K| when non-null.
SpMat psi_with_transport(const BlockSystem& skeleton, const TriMesh& mesh,
                         const std::vector<Eigen::Vector2d>& eta,
                         double* gamma_out = nullptr);

// s*Phi + Psi.
SpMat pencil(const BlockSystem& sys, double s);

// Coordinate-format (row col value) dump for external inspection.
void dump_matrix(const SpMat& M, std::ostream& out);

} // namespace tpfem
