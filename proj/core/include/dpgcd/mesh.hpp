#pragma once

#include <array>
#include <span>
#include <vector>

namespace dpgcd {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class EdgeOrientation { horizontal, vertical };

/// Local edge numbering on every element.
enum LocalEdge : int { kBottom = 0, kTop = 1, kLeft = 2, kRight = 3 };

/// Local corner numbering: (0,0), (1,0), (0,1), (1,1) in reference space.
inline constexpr std::array<std::array<int, 2>, 4> kEdgeCorners{{
    {0, 1},  // bottom, parameterized left to right
    {2, 3},  // top
    {0, 2},  // left, parameterized bottom to top
    {1, 3},  // right
}};

/// +1 where the element's outward normal agrees with the global edge
/// normal (+y on horizontal edges, +x on vertical edges).
inline constexpr std::array<int, 4> kOutwardSign{-1, +1, -1, +1};

struct Element {
  Point origin;  // lower-left corner
  double hx = 0.0;
  double hy = 0.0;
  std::array<int, 4> edges{};     // indexed by LocalEdge
  std::array<int, 4> vertices{};  // indexed by local corner

  [[nodiscard]] double area() const { return hx * hy; }
  [[nodiscard]] Point map(double xi, double eta) const {
    return {origin.x + hx * xi, origin.y + hy * eta};
  }
};

struct Edge {
  EdgeOrientation orientation = EdgeOrientation::horizontal;
  /// Start vertex is the lexicographically smaller endpoint; the edge
  /// parameter runs from it by arc length.
  std::array<int, 2> vertices{};
  /// Adjacent elements; the second entry is -1 on the boundary.
  std::array<int, 2> elements{-1, -1};
  bool boundary = false;

  [[nodiscard]] Point normal() const {
    return orientation == EdgeOrientation::horizontal ? Point{0.0, 1.0}
                                                      : Point{1.0, 0.0};
  }
};

/// Uniform partition of the unit square into nx * ny rectangles.
///
/// Elements are numbered row-major (x fastest). Horizontal edges come
/// first, numbered row by row, followed by vertical edges.
class StructuredMesh {
 public:
  StructuredMesh(int nx, int ny);

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] int num_elements() const { return nx_ * ny_; }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }
  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }

  [[nodiscard]] const Element& element(int e) const { return elements_[e]; }
  [[nodiscard]] const Edge& edge(int e) const { return edges_[e]; }
  [[nodiscard]] const Point& vertex(int v) const { return vertices_[v]; }
  [[nodiscard]] std::span<const Element> elements() const { return elements_; }
  [[nodiscard]] std::span<const Edge> edges() const { return edges_; }

  [[nodiscard]] bool is_boundary_vertex(int v) const;

  /// Element containing p. Points on shared element boundaries go to the
  /// element with the smaller index. Throws std::out_of_range outside the
  /// closed unit square.
  [[nodiscard]] int locate(Point p) const;

 private:
  int nx_;
  int ny_;
  std::vector<Element> elements_;
  std::vector<Edge> edges_;
  std::vector<Point> vertices_;
};

StructuredMesh build_mesh(int nx, int ny);

enum class TrialField { sigma1, sigma2, u, trace, flux };

/// Element-local ordering of trial functions for order p:
/// sigma1, sigma2, u (each (p+1)^2 tensor Bernstein), then the trace
/// u-hat (4 corner functions followed by p interior functions per local
/// edge), then the flux sigma-hat_n (p+1 functions per local edge).
struct LocalLayout {
  int p = 1;

  [[nodiscard]] int interior() const { return (p + 1) * (p + 1); }
  [[nodiscard]] int trace() const { return 4 + 4 * p; }
  [[nodiscard]] int flux() const { return 4 * (p + 1); }
  [[nodiscard]] int total() const { return 3 * interior() + trace() + flux(); }

  [[nodiscard]] int offset(TrialField f) const;
  [[nodiscard]] int size(TrialField f) const;
  [[nodiscard]] TrialField field_of(int local) const;

  /// Local trace index of Bernstein function i (degree p+1) on edge e.
  [[nodiscard]] int trace_index(int edge, int i) const;
  /// Local flux index of Bernstein function i (degree p) on edge e.
  [[nodiscard]] int flux_index(int edge, int i) const;
};

/// Value of local trace function `local` (index within the trace block)
/// restricted to local edge `edge` at edge parameter s in [0,1].
double trace_shape(int p, int local, int edge, double s);

/// Global numbering of the hybrid trial space. Fields are numbered in
/// blocks: sigma1, sigma2, u, u-hat (vertex functions, then edge
/// interiors), sigma-hat_n.
class DofMap {
 public:
  DofMap(const StructuredMesh& mesh, int p);

  [[nodiscard]] int order() const { return layout_.p; }
  [[nodiscard]] const LocalLayout& layout() const { return layout_; }
  [[nodiscard]] int num_local() const { return layout_.total(); }
  [[nodiscard]] int num_global() const { return num_global_; }
  [[nodiscard]] int block_offset(TrialField f) const;
  [[nodiscard]] int block_size(TrialField f) const;

  [[nodiscard]] std::span<const int> element_dofs(int e) const;
  /// +1/-1 per local function; -1 only on flux functions of edges whose
  /// outward normal opposes the global edge normal.
  [[nodiscard]] std::span<const int> element_signs(int e) const;

 private:
  LocalLayout layout_;
  int num_elements_ = 0;
  int num_global_ = 0;
  std::array<int, 5> block_offset_{};
  std::array<int, 5> block_size_{};
  std::vector<int> dofs_;
  std::vector<int> signs_;
};

DofMap build_dof_map(const StructuredMesh& mesh, int p);

/// Sorted global u-hat indices supported on the domain boundary.
std::vector<int> dirichlet_indices(const StructuredMesh& mesh,
                                   const DofMap& dofs);

}  // namespace dpgcd
