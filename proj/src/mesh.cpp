#include "tpfem/mesh.hpp"

#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace tpfem {

TriMesh build_structured(int n)
{
    if (n < 1)
        throw std::invalid_argument("build_structured: subdivision count must be >= 1");

    TriMesh m;
    m.n = n;
    const double h = 1.0 / n;
    const auto vid = [n](int i, int j) { return j * (n + 1) + i; };

    m.vertices.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.vertices.emplace_back(i * h, j * h);

    m.vertex_on_boundary.assign(m.vertices.size(), false);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            if (i == 0 || i == n || j == 0 || j == n)
                m.vertex_on_boundary[vid(i, j)] = true;

    // Two CCW triangles per square, split along the positive-slope diagonal.
    m.tri_vertices.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            m.tri_vertices.push_back({v00, v10, v11});
            m.tri_vertices.push_back({v00, v11, v01});
        }
    }

    // Edges keyed by their sorted endpoint pair, discovered in triangle order.
    std::map<std::pair<int, int>, int> edge_of;
    const int num_tris = static_cast<int>(m.tri_vertices.size());
    m.tri_edges.resize(num_tris);
    m.tri_edge_signs.resize(num_tris);
    m.tri_areas.resize(num_tris);
    m.tri_centroids.resize(num_tris);

    for (int k = 0; k < num_tris; ++k) {
        const auto& tv = m.tri_vertices[k];
        const Eigen::Vector2d& p0 = m.vertices[tv[0]];
        const Eigen::Vector2d& p1 = m.vertices[tv[1]];
        const Eigen::Vector2d& p2 = m.vertices[tv[2]];
        const double twice_area =
            (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
        m.tri_areas[k] = 0.5 * twice_area;
        m.tri_centroids[k] = (p0 + p1 + p2) / 3.0;

        for (int a = 0; a < 3; ++a) {
            const int va = tv[a], vb = tv[(a + 1) % 3];
            const auto key = std::minmax(va, vb);
            auto it = edge_of.find(key);
            if (it == edge_of.end()) {
                const int e = static_cast<int>(m.edge_vertices.size());
                it = edge_of.emplace(key, e).first;
                m.edge_vertices.push_back({key.first, key.second});
                const Eigen::Vector2d t = m.vertices[key.second] - m.vertices[key.first];
                m.edge_lengths.push_back(t.norm());
                // tangent rotated clockwise
                m.edge_normals.emplace_back(t.y() / t.norm(), -t.x() / t.norm());
                m.edge_tris.push_back({-1, -1});
            }
            const int e = it->second;
            m.tri_edges[k][a] = e;
            // outward normal of a CCW triangle on edge (va, vb)
            const Eigen::Vector2d t = m.vertices[vb] - m.vertices[va];
            const Eigen::Vector2d outward(t.y(), -t.x());
            m.tri_edge_signs[k][a] = outward.dot(m.edge_normals[e]) > 0.0 ? 1 : -1;
            if (m.edge_tris[e][0] == -1)
                m.edge_tris[e][0] = k;
            else
                m.edge_tris[e][1] = k;
        }
    }

    m.edge_on_boundary.resize(m.edge_vertices.size());
    for (std::size_t e = 0; e < m.edge_vertices.size(); ++e)
        m.edge_on_boundary[e] = (m.edge_tris[e][1] == -1);

    return m;
}

EdgeAdjacency adjacency(const TriMesh& mesh, int edge)
{
    if (edge < 0 || edge >= mesh.num_edges())
        throw std::out_of_range("adjacency: edge index out of range");

    EdgeAdjacency adj{};
    adj.count = 0;
    adj.tri = {-1, -1};
    adj.sign = {0, 0};
    for (int slot = 0; slot < 2; ++slot) {
        const int k = mesh.edge_tris[edge][slot];
        if (k == -1)
            continue;
        adj.tri[adj.count] = k;
        for (int a = 0; a < 3; ++a)
            if (mesh.tri_edges[k][a] == edge)
                adj.sign[adj.count] = mesh.tri_edge_signs[k][a];
        ++adj.count;
    }
    return adj;
}

void dump_mesh(const TriMesh& mesh, std::ostream& out)
{
    out << "# vertices " << mesh.num_vertices() << "\n";
    for (const auto& v : mesh.vertices)
        out << v.x() << " " << v.y() << "\n";
    out << "# triangles " << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.tri_vertices)
        out << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "# edges " << mesh.num_edges() << "\n";
    for (std::size_t e = 0; e < mesh.edge_vertices.size(); ++e)
        out << mesh.edge_vertices[e][0] << " " << mesh.edge_vertices[e][1] << " "
            << (mesh.edge_on_boundary[e] ? 1 : 0) << "\n";
}

} // namespace tpfem
