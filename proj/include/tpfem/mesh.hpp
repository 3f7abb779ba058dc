/*
 * Structured triangulations of the unit square with oriented edges.
 *
 * Every edge carries a globally fixed unit normal, chosen lexicographically
 * (tangent from the lower vertex index to the higher, rotated clockwise).
 * Flux degrees of freedom and divergence signs are deterministic because
 * they only ever reference this global orientation.
 */

#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace tpfem {

struct TriMesh
{
    int n = 0; // subdivision count of the unit square

    std::vector<Eigen::Vector2d> vertices;

    // Vertex index triples, positively oriented (CCW).
    std::vector<std::array<int, 3>> tri_vertices;
    // Edge index of local edge a = (v_a, v_{a+1 mod 3}).
    std::vector<std::array<int, 3>> tri_edges;
    // +1 when the triangle's outward normal on that edge agrees with the
    // edge's global normal, -1 otherwise.
    std::vector<std::array<int, 3>> tri_edge_signs;
    std::vector<double> tri_areas;
    std::vector<Eigen::Vector2d> tri_centroids;

    // Endpoint pairs with lower vertex index first.
    std::vector<std::array<int, 2>> edge_vertices;
    std::vector<Eigen::Vector2d> edge_normals; // unit, global orientation
    std::vector<double> edge_lengths;
    // Incident triangles; second entry -1 for boundary edges.
    std::vector<std::array<int, 2>> edge_tris;
    std::vector<bool> edge_on_boundary;
    std::vector<bool> vertex_on_boundary;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_edges() const { return static_cast<int>(edge_vertices.size()); }
    int num_triangles() const { return static_cast<int>(tri_vertices.size()); }
};

// n x n grid of squares, each split by the diagonal of positive slope.
// Throws std::invalid_argument for n < 1.
TriMesh build_structured(int n);

struct EdgeAdjacency
{
    int count;                 // 1 (boundary) or 2 (interior)
    std::array<int, 2> tri;    // incident triangles, -1 padding
    std::array<int, 2> sign;   // orientation sign of the edge in each triangle
};

// Incident triangles of an edge with their orientation signs.
// Throws std::out_of_range for an invalid edge index.
EdgeAdjacency adjacency(const TriMesh& mesh, int edge);

// Plain-text vertex/triangle/edge tables for external plotting.
void dump_mesh(const TriMesh& mesh, std::ostream& out);

} // namespace tpfem
