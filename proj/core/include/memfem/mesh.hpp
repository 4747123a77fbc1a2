#pragma once

#include <array>
#include <iosfwd>
#include <vector>

namespace memfem {

enum class EdgeTag { Interior, Interface, BoundaryDirichlet, BoundaryNeumann };

struct Triangle {
  std::array<int, 3> v;     // vertex indices, counterclockwise
  std::array<int, 3> edge;  // global edge of local edge i = (v[(i+1)%3], v[(i+2)%3])
};

struct Edge {
  int a = -1, b = -1;               // endpoint vertices, a < b
  std::array<int, 2> tri{-1, -1};   // incident triangles; tri[1] = -1 on the boundary
  EdgeTag tag = EdgeTag::Interior;
  double length = 0;
  std::array<double, 2> normal{};   // unit normal, = tangent a->b rotated by -90 deg
};

// Structured triangulation of the unit square: M x M subsquares, each split
// along its lower-left -> upper-right diagonal.  Vertex (i,j) sits at
// (i/M, j/M) with index j*(M+1)+i.  The membrane lives on x = 1/2, so M must
// be even for the vertical gridline at 1/2 to exist.
//
// Edge tags: vertical edges on x = 1/2 are Interface, horizontal edges on
// y in {0,1} are BoundaryDirichlet, vertical edges on x in {0,1} are
// BoundaryNeumann, everything else Interior.
struct Mesh {
  int M = 0;
  double h = 0;  // 1/M
  std::vector<std::array<double, 2>> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  // Local index (0..2) of global edge `e` within triangle `t`; throws if not incident.
  int local_edge(int t, int e) const;

  // Triangle containing (x,y) and its reference coordinates.  Points on the
  // shared diagonal resolve to the lower-right triangle of the subsquare.
  struct Location {
    int tri;
    std::array<double, 2> ref;
  };
  Location locate(double x, double y) const;
};

Mesh build_structured(int M);

// Unit normal on `edge` pointing out of incident triangle `tri`.
std::array<double, 2> outward_normal(const Mesh& mesh, int edge, int tri);

// Plain-text dump with sections: vertices, triangles, edges (with tags).
void dump(const Mesh& mesh, std::ostream& out);

}  // namespace memfem
