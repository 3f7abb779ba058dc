#include "tpfem/assembly.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace tpfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(int rows, int cols, const Triplets& t)
{
    SpMat M(rows, cols);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

// Appends scale * B at block offset (roff, coff). Explicit zeros survive.
void add_block(Triplets& out, const SpMat& B, int roff, int coff, double scale = 1.0)
{
    for (int col = 0; col < B.outerSize(); ++col)
        for (SpMat::InnerIterator it(B, col); it; ++it)
            out.emplace_back(roff + static_cast<int>(it.row()),
                             coff + static_cast<int>(it.col()), scale * it.value());
}

void add_block_transposed(Triplets& out, const SpMat& B, int roff, int coff,
                          double scale = 1.0)
{
    for (int col = 0; col < B.outerSize(); ++col)
        for (SpMat::InnerIterator it(B, col); it; ++it)
            out.emplace_back(roff + static_cast<int>(it.col()),
                             coff + static_cast<int>(it.row()), scale * it.value());
}

} // namespace

Sources zero_sources()
{
    Sources s;
    s.g = [](double, double, double) { return 0.0; };
    s.h = [](double, double, double) { return 0.0; };
    s.f = [](double, double, double) { return Eigen::Vector2d::Zero().eval(); };
    return s;
}

SpMat assemble_mass_P0(const TriMesh& mesh, double weight)
{
    if (!(weight > 0.0))
        throw std::invalid_argument("assemble_mass_P0: weight must be positive");
    Triplets t;
    t.reserve(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k)
        t.emplace_back(k, k, weight * mesh.tri_areas[k]);
    return from_triplets(mesh.num_triangles(), mesh.num_triangles(), t);
}

SpMat assemble_mass_Hdiv(const TriMesh& mesh, const Eigen::Matrix2d& M)
{
    if (sym_eigenvalue_bounds(M).first <= 0.0)
        throw std::invalid_argument("assemble_mass_Hdiv: weight tensor must be SPD");
    // Basis products are quadratic per triangle; the midpoint rule is exact.
    const auto& quad = tri_quadrature(2);
    Triplets t;
    t.reserve(9 * mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                double s = 0.0;
                for (std::size_t q = 0; q < pts.size(); ++q)
                    s += quad.weights[q] *
                         rt0_basis(mesh, k, a, pts[q]).dot(M * rt0_basis(mesh, k, b, pts[q]));
                t.emplace_back(mesh.tri_edges[k][a], mesh.tri_edges[k][b],
                               mesh.tri_areas[k] * s);
            }
        }
    }
    return from_triplets(mesh.num_edges(), mesh.num_edges(), t);
}

SpMat assemble_div(const TriMesh& mesh)
{
    // integral over K of div phi_e = orientation sign, by the divergence theorem
    Triplets t;
    t.reserve(3 * mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k)
        for (int a = 0; a < 3; ++a)
            t.emplace_back(mesh.tri_edges[k][a], k,
                           static_cast<double>(mesh.tri_edge_signs[k][a]));
    return from_triplets(mesh.num_edges(), mesh.num_triangles(), t);
}

TraceBlocks assemble_coupling_traces(const TriMesh& mesh, const MaterialParams& p)
{
    const int E = mesh.num_edges();
    const int F = mesh.num_triangles();
    // c_r/(2 alpha) and a_r/(2 beta) written without the removable zero at
    // alpha = 0 or beta = 0
    const double coef_p = p.alpha / (2.0 * (p.mu + p.lambda));
    const double coef_T = p.beta / (2.0 * (p.mu + p.lambda));
    const double b_r = derived_coeffs(p).b_r;

    Triplets tp, tT, tTp;
    tp.reserve(6 * F);
    tT.reserve(6 * F);
    tTp.reserve(F);
    for (int k = 0; k < F; ++k) {
        for (int a = 0; a < 3; ++a) {
            const int e = mesh.tri_edges[k][a];
            const Eigen::Vector2d cell_int = rt0_cell_integral(mesh, k, a);
            // trace of a row-1 basis is its x component, of a row-2 basis its
            // y component
            tp.emplace_back(k, e, coef_p * cell_int.x());
            tp.emplace_back(k, E + e, coef_p * cell_int.y());
            tT.emplace_back(k, e, coef_T * cell_int.x());
            tT.emplace_back(k, E + e, coef_T * cell_int.y());
        }
        tTp.emplace_back(k, k, -b_r * mesh.tri_areas[k]);
    }
    TraceBlocks blocks;
    blocks.A_ps = from_triplets(F, 2 * E, tp);
    blocks.A_Ts = from_triplets(F, 2 * E, tT);
    blocks.A_Tp = from_triplets(F, F, tTp);
    return blocks;
}

SpMat assemble_weak_symmetry(const TriMesh& mesh)
{
    const int E = mesh.num_edges();
    const int F = mesh.num_triangles();
    Triplets t;
    t.reserve(6 * F);
    for (int k = 0; k < F; ++k) {
        for (int a = 0; a < 3; ++a) {
            const int e = mesh.tri_edges[k][a];
            const Eigen::Vector2d cell_int = rt0_cell_integral(mesh, k, a);
            // as(tau) = tau12 - tau21: row-1 basis contributes +phi_y,
            // row-2 basis -phi_x
            t.emplace_back(k, e, cell_int.y());
            t.emplace_back(k, E + e, -cell_int.x());
        }
    }
    return from_triplets(F, 2 * E, t);
}

std::vector<Eigen::Vector2d> frozen_transport(const TriMesh& mesh, const MaterialParams& p,
                                              const Eigen::VectorXd& r_coeffs)
{
    if (r_coeffs.size() != mesh.num_edges())
        throw std::invalid_argument("frozen_transport: coefficient size mismatch");
    const Eigen::Matrix2d Theta_inv = p.Theta.inverse();
    std::vector<Eigen::Vector2d> eta(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k)
        eta[k] = Theta_inv * rt0_eval(mesh, r_coeffs, k, mesh.tri_centroids[k]);
    return eta;
}

SpMat assemble_convective(const TriMesh& mesh, const std::vector<Eigen::Vector2d>& eta,
                          double* gamma_out)
{
    if (eta.size() != static_cast<std::size_t>(mesh.num_triangles()))
        throw std::invalid_argument("assemble_convective: eta size mismatch");
    double gamma = 0.0;
    Triplets t;
    t.reserve(3 * mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        gamma = std::max(gamma, eta[k].norm());
        for (int a = 0; a < 3; ++a)
            t.emplace_back(mesh.tri_edges[k][a], k,
                           eta[k].dot(rt0_cell_integral(mesh, k, a)));
    }
    if (gamma_out)
        *gamma_out = gamma;
    return from_triplets(mesh.num_edges(), mesh.num_triangles(), t);
}

Eigen::VectorXd assemble_load(const TriMesh& mesh, const SpaceLayout& layout,
                              const Sources& sources, double t)
{
    const auto& quad = tri_quadrature(4);
    Eigen::VectorXd L = Eigen::VectorXd::Zero(layout.total);
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double w = mesh.tri_areas[k] * quad.weights[q];
            const double x = pts[q].x(), y = pts[q].y();
            L[layout.off_p + k] += w * sources.g(x, y, t);
            L[layout.off_T + k] += w * sources.h(x, y, t);
            const Eigen::Vector2d f = sources.f(x, y, t);
            L[layout.off_u + 2 * k] += w * f.x();
            L[layout.off_u + 2 * k + 1] += w * f.y();
        }
    }
    return L;
}

BlockSystem assemble_system(const TriMesh& mesh, const MaterialParams& p,
                            const Eigen::VectorXd& r_frozen, const Sources& sources,
                            double t, std::ostream* warn)
{
    if (warn) {
        const auto rep = check_constraints(p);
        if (!rep.pass)
            *warn << "warning: admissibility constraints violated (margins " << rep.margin1
                  << ", " << rep.margin2 << ", " << rep.margin3
                  << "); proceeding outside the dissipative regime\n";
    }

    BlockSystem sys;
    sys.layout = build_layout(mesh);
    const SpaceLayout& l = sys.layout;
    const int E = mesh.num_edges();
    const auto d = derived_coeffs(p);

    sys.A_TT = assemble_mass_P0(mesh, p.a0 + d.a_r);
    sys.A_pp = assemble_mass_P0(mesh, p.c0 + d.c_r);
    sys.A_ww = assemble_mass_Hdiv(mesh, p.K.inverse());
    sys.A_rr = assemble_mass_Hdiv(mesh, p.Theta.inverse());
    const auto traces = assemble_coupling_traces(mesh, p);
    sys.A_ps = traces.A_ps;
    sys.A_Ts = traces.A_Ts;
    sys.A_Tp = traces.A_Tp;
    sys.A_wp = assemble_div(mesh);
    sys.A_rT = sys.A_wp;
    sys.A_rot = assemble_weak_symmetry(mesh);
    sys.A_wT = assemble_convective(mesh, frozen_transport(mesh, p, r_frozen), &sys.gamma_h);

    // Compliance Gram of the row-wise stress element: the Frobenius part is
    // the identity-weighted flux mass per row; the trace part couples the x
    // component of row 1 with the y component of row 2.
    {
        const auto& quad = tri_quadrature(2);
        const double inv_2mu = 1.0 / (2.0 * p.mu);
        const double trace_factor = p.lambda / (2.0 * (p.mu + p.lambda));
        Triplets ts;
        ts.reserve(36 * mesh.num_triangles());
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            const auto pts = quadrature_points(mesh, k, quad);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    // componentwise products integrated exactly
                    Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
                    double frob = 0.0;
                    for (std::size_t q = 0; q < pts.size(); ++q) {
                        const Eigen::Vector2d pa = rt0_basis(mesh, k, a, pts[q]);
                        const Eigen::Vector2d pb = rt0_basis(mesh, k, b, pts[q]);
                        G += quad.weights[q] * pa * pb.transpose();
                        frob += quad.weights[q] * pa.dot(pb);
                    }
                    G *= mesh.tri_areas[k];
                    frob *= mesh.tri_areas[k];
                    const int ea = mesh.tri_edges[k][a];
                    const int eb = mesh.tri_edges[k][b];
                    // (row r basis, row r basis): Frobenius minus trace(rr)
                    ts.emplace_back(ea, eb, inv_2mu * (frob - trace_factor * G(0, 0)));
                    ts.emplace_back(E + ea, E + eb, inv_2mu * (frob - trace_factor * G(1, 1)));
                    // cross rows couple only through the trace part
                    ts.emplace_back(ea, E + eb, -inv_2mu * trace_factor * G(0, 1));
                    ts.emplace_back(E + ea, eb, -inv_2mu * trace_factor * G(1, 0));
                }
            }
        }
        sys.A_ss = from_triplets(2 * E, 2 * E, ts);
    }

    sys.A_us = [&] {
        Triplets tu;
        tu.reserve(6 * mesh.num_triangles());
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            for (int a = 0; a < 3; ++a) {
                const int e = mesh.tri_edges[k][a];
                const double s = mesh.tri_edge_signs[k][a];
                tu.emplace_back(2 * k, e, s);
                tu.emplace_back(2 * k + 1, E + e, s);
            }
        }
        return from_triplets(l.n_u, 2 * E, tu);
    }();

    // Accumulation operator: p and T rows only.
    {
        Triplets t_phi;
        add_block(t_phi, sys.A_pp, l.off_p, l.off_p);
        add_block(t_phi, sys.A_ps, l.off_p, l.off_sigma);
        add_block_transposed(t_phi, sys.A_Tp, l.off_p, l.off_T);
        add_block(t_phi, sys.A_Tp, l.off_T, l.off_p);
        add_block(t_phi, sys.A_Ts, l.off_T, l.off_sigma);
        add_block(t_phi, sys.A_TT, l.off_T, l.off_T);
        sys.Phi = from_triplets(l.total, l.total, t_phi);
    }

    // Quasi-static operator.
    {
        Triplets t_psi;
        add_block_transposed(t_psi, sys.A_wp, l.off_p, l.off_w);
        add_block_transposed(t_psi, sys.A_ps, l.off_sigma, l.off_p);
        add_block(t_psi, sys.A_ss, l.off_sigma, l.off_sigma);
        add_block_transposed(t_psi, sys.A_Ts, l.off_sigma, l.off_T);
        add_block_transposed(t_psi, sys.A_us, l.off_sigma, l.off_u);
        add_block_transposed(t_psi, sys.A_rot, l.off_sigma, l.off_rho);
        add_block_transposed(t_psi, sys.A_wT, l.off_T, l.off_w, -1.0);
        add_block_transposed(t_psi, sys.A_rT, l.off_T, l.off_r);
        add_block(t_psi, sys.A_wp, l.off_w, l.off_p, -1.0);
        add_block(t_psi, sys.A_ww, l.off_w, l.off_w);
        add_block(t_psi, sys.A_us, l.off_u, l.off_sigma, -1.0);
        add_block(t_psi, sys.A_rT, l.off_r, l.off_T, -1.0);
        add_block(t_psi, sys.A_rr, l.off_r, l.off_r);
        add_block(t_psi, sys.A_rot, l.off_rho, l.off_sigma, -1.0);
        sys.Psi = from_triplets(l.total, l.total, t_psi);
    }

    sys.L = assemble_load(mesh, l, sources, t);
    return sys;
}

SpMat psi_with_transport(const BlockSystem& skeleton, const TriMesh& mesh,
                         const std::vector<Eigen::Vector2d>& eta, double* gamma_out)
{
    const SpMat A_wT = assemble_convective(mesh, eta, gamma_out);
    const SpaceLayout& l = skeleton.layout;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(A_wT.nonZeros()));
    for (int col = 0; col < A_wT.outerSize(); ++col)
        for (SpMat::InnerIterator it(A_wT, col); it; ++it)
            t.emplace_back(l.off_T + static_cast<int>(it.col()),
                           l.off_w + static_cast<int>(it.row()), -it.value());
    SpMat C(l.total, l.total);
    C.setFromTriplets(t.begin(), t.end());
    SpMat psi = skeleton.Psi;
    psi += C;
    return psi;
}

SpMat pencil(const BlockSystem& sys, double s)
{
    SpMat M = s * sys.Phi;
    M += sys.Psi;
    return M;
}

void dump_matrix(const SpMat& M, std::ostream& out)
{
    for (int col = 0; col < M.outerSize(); ++col)
        for (SpMat::InnerIterator it(M, col); it; ++it)
            out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

} // namespace tpfem
