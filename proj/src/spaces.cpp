#include "tpfem/spaces.hpp"

#include <cmath>
#include <stdexcept>

namespace tpfem {

SpaceLayout build_layout(const TriMesh& mesh)
{
    const int F = mesh.num_triangles();
    const int E = mesh.num_edges();
    SpaceLayout l;
    l.n_T = F;
    l.n_r = E;
    l.n_p = F;
    l.n_w = E;
    l.n_sigma = 2 * E;
    l.n_u = 2 * F;
    l.n_rho = F;
    l.off_T = 0;
    l.off_r = l.off_T + l.n_T;
    l.off_p = l.off_r + l.n_r;
    l.off_w = l.off_p + l.n_p;
    l.off_sigma = l.off_w + l.n_w;
    l.off_u = l.off_sigma + l.n_sigma;
    l.off_rho = l.off_u + l.n_u;
    l.total = l.off_rho + l.n_rho;
    return l;
}

const TriQuadrature& tri_quadrature(int degree)
{
    // 3-point edge-midpoint rule, exact through degree 2.
    static const TriQuadrature deg2 = [] {
        TriQuadrature q;
        q.bary = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
        q.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        return q;
    }();
    // 6-point rule, exact through degree 4.
    static const TriQuadrature deg4 = [] {
        TriQuadrature q;
        const double a = 0.445948490915965;
        const double b = 0.091576213509771;
        const double wa = 0.223381589678011;
        const double wb = 0.109951743655322;
        q.bary = {{a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
                  {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}};
        q.weights = {wa, wa, wa, wb, wb, wb};
        return q;
    }();
    if (degree <= 2)
        return deg2;
    return deg4;
}

std::vector<Eigen::Vector2d> quadrature_points(const TriMesh& mesh, int k,
                                               const TriQuadrature& quad)
{
    const auto& tv = mesh.tri_vertices[k];
    const Eigen::Vector2d& p0 = mesh.vertices[tv[0]];
    const Eigen::Vector2d& p1 = mesh.vertices[tv[1]];
    const Eigen::Vector2d& p2 = mesh.vertices[tv[2]];
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(quad.bary.size());
    for (const auto& b : quad.bary)
        pts.push_back(b[0] * p0 + b[1] * p1 + b[2] * p2);
    return pts;
}

Eigen::VectorXd project_P0(const TriMesh& mesh, const ScalarFn& f)
{
    const auto& quad = tri_quadrature(2);
    Eigen::VectorXd coeffs(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        double mean = 0.0;
        for (std::size_t q = 0; q < pts.size(); ++q)
            mean += quad.weights[q] * f(pts[q].x(), pts[q].y());
        coeffs[k] = mean;
    }
    return coeffs;
}

Eigen::VectorXd interpolate_Hdiv(const TriMesh& mesh, const VectorFn& v)
{
    // 2-point Gauss on each edge.
    const double g = 0.5 / std::sqrt(3.0);
    Eigen::VectorXd coeffs(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Eigen::Vector2d& a = mesh.vertices[mesh.edge_vertices[e][0]];
        const Eigen::Vector2d& b = mesh.vertices[mesh.edge_vertices[e][1]];
        const Eigen::Vector2d mid = 0.5 * (a + b);
        const Eigen::Vector2d half = b - a;
        const Eigen::Vector2d x1 = mid - g * half;
        const Eigen::Vector2d x2 = mid + g * half;
        const Eigen::Vector2d& n = mesh.edge_normals[e];
        coeffs[e] = 0.5 * mesh.edge_lengths[e] *
                    (v(x1.x(), x1.y()).dot(n) + v(x2.x(), x2.y()).dot(n));
    }
    return coeffs;
}

Eigen::Vector2d rt0_basis(const TriMesh& mesh, int k, int a, const Eigen::Vector2d& x)
{
    const Eigen::Vector2d& opp = mesh.vertices[mesh.tri_vertices[k][(a + 2) % 3]];
    return mesh.tri_edge_signs[k][a] * (x - opp) / (2.0 * mesh.tri_areas[k]);
}

double rt0_div(const TriMesh& mesh, int k, int a)
{
    return mesh.tri_edge_signs[k][a] / mesh.tri_areas[k];
}

Eigen::Vector2d rt0_cell_integral(const TriMesh& mesh, int k, int a)
{
    const Eigen::Vector2d& opp = mesh.vertices[mesh.tri_vertices[k][(a + 2) % 3]];
    return 0.5 * mesh.tri_edge_signs[k][a] * (mesh.tri_centroids[k] - opp);
}

Eigen::Vector2d rt0_eval(const TriMesh& mesh, const Eigen::VectorXd& coeffs, int k,
                         const Eigen::Vector2d& x)
{
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int a = 0; a < 3; ++a)
        v += coeffs[mesh.tri_edges[k][a]] * rt0_basis(mesh, k, a, x);
    return v;
}

double norm_P0(const TriMesh& mesh, const Eigen::VectorXd& coeffs)
{
    const int F = mesh.num_triangles();
    double sum = 0.0;
    if (coeffs.size() == F) {
        for (int k = 0; k < F; ++k)
            sum += mesh.tri_areas[k] * coeffs[k] * coeffs[k];
    } else if (coeffs.size() == 2 * F) {
        for (int k = 0; k < F; ++k)
            sum += mesh.tri_areas[k] *
                   (coeffs[2 * k] * coeffs[2 * k] + coeffs[2 * k + 1] * coeffs[2 * k + 1]);
    } else {
        throw std::invalid_argument("norm_P0: coefficient size mismatch");
    }
    return std::sqrt(sum);
}

double norm_RT0(const TriMesh& mesh, const Eigen::VectorXd& coeffs)
{
    if (coeffs.size() != mesh.num_edges())
        throw std::invalid_argument("norm_RT0: coefficient size mismatch");
    // The basis products are quadratic; the midpoint rule integrates exactly.
    const auto& quad = tri_quadrature(2);
    double sum = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q)
            sum += mesh.tri_areas[k] * quad.weights[q] *
                   rt0_eval(mesh, coeffs, k, pts[q]).squaredNorm();
    }
    return std::sqrt(sum);
}

double norm_RT0_div(const TriMesh& mesh, const Eigen::VectorXd& coeffs)
{
    if (coeffs.size() != mesh.num_edges())
        throw std::invalid_argument("norm_RT0_div: coefficient size mismatch");
    double sum = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        double div = 0.0;
        for (int a = 0; a < 3; ++a)
            div += coeffs[mesh.tri_edges[k][a]] * rt0_div(mesh, k, a);
        sum += mesh.tri_areas[k] * div * div;
    }
    return std::sqrt(sum);
}

} // namespace tpfem
