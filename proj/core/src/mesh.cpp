#include "memfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace memfem {

namespace {

int insert_edge(std::map<std::pair<int, int>, int>& index, Mesh& mesh, int va, int vb, int tri) {
  const std::pair<int, int> key{std::min(va, vb), std::max(va, vb)};
  auto it = index.find(key);
  if (it == index.end()) {
    Edge e;
    e.a = key.first;
    e.b = key.second;
    e.tri = {tri, -1};
    it = index.emplace(key, mesh.num_edges()).first;
    mesh.edges.push_back(e);
  } else {
    Edge& e = mesh.edges[it->second];
    if (e.tri[1] != -1) throw std::runtime_error("mesh: edge incident to more than two triangles");
    e.tri[1] = tri;
  }
  return it->second;
}

}  // namespace

Mesh build_structured(int M) {
  if (M < 2 || M % 2 != 0)
    throw std::invalid_argument("build_structured: M must be even and >= 2 so the membrane at x = 1/2 is resolved by mesh edges (got M = " + std::to_string(M) + ")");

  Mesh mesh;
  mesh.M = M;
  mesh.h = 1.0 / M;

  mesh.vertices.reserve((M + 1) * (M + 1));
  for (int j = 0; j <= M; ++j)
    for (int i = 0; i <= M; ++i)
      mesh.vertices.push_back({double(i) / M, double(j) / M});

  mesh.triangles.reserve(2 * M * M);
  std::map<std::pair<int, int>, int> edge_index;
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < M; ++i) {
      const int v00 = j * (M + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + M + 1;
      const int v11 = v01 + 1;
      // Lower-right and upper-left halves, both counterclockwise.
      for (const auto& tri_v : {std::array<int, 3>{v00, v10, v11}, std::array<int, 3>{v00, v11, v01}}) {
        const int t = mesh.num_triangles();
        Triangle tri;
        tri.v = tri_v;
        for (int k = 0; k < 3; ++k)
          tri.edge[k] = insert_edge(edge_index, mesh, tri_v[(k + 1) % 3], tri_v[(k + 2) % 3], t);
        mesh.triangles.push_back(tri);
      }
    }
  }

  for (Edge& e : mesh.edges) {
    const auto& pa = mesh.vertices[e.a];
    const auto& pb = mesh.vertices[e.b];
    const double tx = pb[0] - pa[0], ty = pb[1] - pa[1];
    e.length = std::hypot(tx, ty);
    e.normal = {ty / e.length, -tx / e.length};

    // Gridline coordinates i/M are exact doubles for the values tested here,
    // so tagging by equality is safe.
    const bool boundary = (e.tri[1] == -1);
    if (pa[0] == 0.5 && pb[0] == 0.5) {
      if (boundary) throw std::runtime_error("mesh: interface edge lacks a second triangle");
      e.tag = EdgeTag::Interface;
    } else if ((pa[1] == 0.0 && pb[1] == 0.0) || (pa[1] == 1.0 && pb[1] == 1.0)) {
      e.tag = EdgeTag::BoundaryDirichlet;
    } else if ((pa[0] == 0.0 && pb[0] == 0.0) || (pa[0] == 1.0 && pb[0] == 1.0)) {
      e.tag = EdgeTag::BoundaryNeumann;
    } else {
      e.tag = EdgeTag::Interior;
    }
    if (boundary && (e.tag == EdgeTag::Interior))
      throw std::runtime_error("mesh: boundary edge left untagged");
    if (!boundary && (e.tag == EdgeTag::BoundaryDirichlet || e.tag == EdgeTag::BoundaryNeumann))
      throw std::runtime_error("mesh: interior edge tagged as boundary");
  }

  // Euler relation V - E + T = 1 for a triangulated disk.
  if (mesh.num_vertices() - mesh.num_edges() + mesh.num_triangles() != 1)
    throw std::runtime_error("mesh: Euler check failed");

  return mesh;
}

int Mesh::local_edge(int t, int e) const {
  const Triangle& tri = triangles.at(t);
  for (int k = 0; k < 3; ++k)
    if (tri.edge[k] == e) return k;
  throw std::invalid_argument("local_edge: edge " + std::to_string(e) + " not incident to triangle " + std::to_string(t));
}

Mesh::Location Mesh::locate(double x, double y) const {
  if (x < 0 || x > 1 || y < 0 || y > 1) throw std::invalid_argument("locate: point outside the unit square");
  int i = std::min(static_cast<int>(x * M), M - 1);
  int j = std::min(static_cast<int>(y * M), M - 1);
  const double u = x * M - i;
  const double v = y * M - j;
  const int cell = 2 * (j * M + i);
  // Lower-right triangle (v00,v10,v11) covers u >= v; its map is
  // x = x00 + h*(r+s), y = y00 + h*s for reference (r,s).
  if (u >= v) return {cell, {u - v, v}};
  return {cell + 1, {u, v - u}};
}

std::array<double, 2> outward_normal(const Mesh& mesh, int edge, int tri) {
  const Edge& e = mesh.edges.at(edge);
  if (e.tri[0] != tri && e.tri[1] != tri)
    throw std::invalid_argument("outward_normal: triangle not incident to edge");
  const Triangle& t = mesh.triangles.at(tri);
  // The vertex of `tri` opposite to the edge tells us which side the triangle
  // lies on; the outward normal points away from it.
  int opp = -1;
  for (int k = 0; k < 3; ++k)
    if (t.v[k] != e.a && t.v[k] != e.b) opp = t.v[k];
  const auto& pa = mesh.vertices[e.a];
  const auto& po = mesh.vertices[opp];
  const double dot = (po[0] - pa[0]) * e.normal[0] + (po[1] - pa[1]) * e.normal[1];
  if (dot < 0) return e.normal;
  return {-e.normal[0], -e.normal[1]};
}

void dump(const Mesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.num_vertices() << "\n";
  for (const auto& p : mesh.vertices) out << p[0] << " " << p[1] << "\n";
  out << "triangles " << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles)
    out << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
  out << "edges " << mesh.num_edges() << "\n";
  for (const auto& e : mesh.edges) {
    const char* tag = "interior";
    switch (e.tag) {
      case EdgeTag::Interior: tag = "interior"; break;
      case EdgeTag::Interface: tag = "interface"; break;
      case EdgeTag::BoundaryDirichlet: tag = "dirichlet"; break;
      case EdgeTag::BoundaryNeumann: tag = "neumann"; break;
    }
    out << e.a << " " << e.b << " " << tag << "\n";
  }
}

}  // namespace memfem
