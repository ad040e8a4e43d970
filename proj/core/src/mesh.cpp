#include "dpgcd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpgcd/basis.hpp"

namespace dpgcd {

StructuredMesh::StructuredMesh(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("mesh needs at least one element per direction, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
  }
  const double hx = 1.0 / nx;
  const double hy = 1.0 / ny;
  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  const int num_horizontal = nx * (ny + 1);
  const auto hid = [nx](int i, int j) { return j * nx + i; };
  const auto vertical_id = [nx, num_horizontal](int i, int j) {
    return num_horizontal + j * (nx + 1) + i;
  };

  vertices_.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Exact endpoints so boundary tests compare against 0 and 1.
      vertices_.push_back({i == nx ? 1.0 : i * hx, j == ny ? 1.0 : j * hy});
    }
  }

  edges_.resize(num_horizontal + ny * (nx + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Edge& e = edges_[hid(i, j)];
      e.orientation = EdgeOrientation::horizontal;
      e.vertices = {vid(i, j), vid(i + 1, j)};
      e.boundary = (j == 0 || j == ny);
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      Edge& e = edges_[vertical_id(i, j)];
      e.orientation = EdgeOrientation::vertical;
      e.vertices = {vid(i, j), vid(i, j + 1)};
      e.boundary = (i == 0 || i == nx);
    }
  }

  elements_.reserve(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Element el;
      el.origin = vertices_[vid(i, j)];
      // Uniform sizes keep all elements exactly congruent.
      el.hx = hx;
      el.hy = hy;
      el.edges = {hid(i, j), hid(i, j + 1), vertical_id(i, j),
                  vertical_id(i + 1, j)};
      el.vertices = {vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)};
      const int id = static_cast<int>(elements_.size());
      for (int edge : el.edges) {
        auto& adj = edges_[edge].elements;
        if (adj[0] < 0) {
          adj[0] = id;
        } else {
          adj[1] = id;
        }
      }
      elements_.push_back(el);
    }
  }
}

bool StructuredMesh::is_boundary_vertex(int v) const {
  const int i = v % (nx_ + 1);
  const int j = v / (nx_ + 1);
  return i == 0 || j == 0 || i == nx_ || j == ny_;
}

int StructuredMesh::locate(Point p) const {
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
    throw std::out_of_range("point (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") outside the unit square");
  }
  // ceil(x n) - 1 puts points on an interior grid line into the lower cell.
  const auto cell = [](double x, int n) {
    const int c = static_cast<int>(std::ceil(x * n)) - 1;
    return std::clamp(c, 0, n - 1);
  };
  return cell(p.y, ny_) * nx_ + cell(p.x, nx_);
}

StructuredMesh build_mesh(int nx, int ny) { return StructuredMesh(nx, ny); }

int LocalLayout::offset(TrialField f) const {
  switch (f) {
    case TrialField::sigma1: return 0;
    case TrialField::sigma2: return interior();
    case TrialField::u: return 2 * interior();
    case TrialField::trace: return 3 * interior();
    case TrialField::flux: return 3 * interior() + trace();
  }
  return 0;
}

int LocalLayout::size(TrialField f) const {
  switch (f) {
    case TrialField::sigma1:
    case TrialField::sigma2:
    case TrialField::u: return interior();
    case TrialField::trace: return trace();
    case TrialField::flux: return flux();
  }
  return 0;
}

TrialField LocalLayout::field_of(int local) const {
  if (local < interior()) return TrialField::sigma1;
  if (local < 2 * interior()) return TrialField::sigma2;
  if (local < 3 * interior()) return TrialField::u;
  if (local < 3 * interior() + trace()) return TrialField::trace;
  return TrialField::flux;
}

int LocalLayout::trace_index(int edge, int i) const {
  if (i == 0) return kEdgeCorners[edge][0];
  if (i == p + 1) return kEdgeCorners[edge][1];
  return 4 + edge * p + (i - 1);
}

int LocalLayout::flux_index(int edge, int i) const { return edge * (p + 1) + i; }

double trace_shape(int p, int local, int edge, double s) {
  const LocalLayout layout{p};
  for (int i = 0; i <= p + 1; ++i) {
    if (layout.trace_index(edge, i) == local) return bernstein_eval(i, p + 1, s);
  }
  return 0.0;
}

DofMap::DofMap(const StructuredMesh& mesh, int p) : layout_{p} {
  if (p < 1 || p + 1 > kMaxDegree) {
    throw std::invalid_argument("trial order p=" + std::to_string(p) +
                                " outside [1, " + std::to_string(kMaxDegree - 1) + "]");
  }
  num_elements_ = mesh.num_elements();
  const int ni = layout_.interior();
  block_size_ = {num_elements_ * ni, num_elements_ * ni, num_elements_ * ni,
                 mesh.num_vertices() + mesh.num_edges() * p,
                 mesh.num_edges() * (p + 1)};
  int acc = 0;
  for (int b = 0; b < 5; ++b) {
    block_offset_[b] = acc;
    acc += block_size_[b];
  }
  num_global_ = acc;

  const int nl = layout_.total();
  dofs_.resize(static_cast<std::size_t>(num_elements_) * nl);
  signs_.assign(dofs_.size(), 1);
  const int trace_edge_base = block_offset_[3] + mesh.num_vertices();

  for (int e = 0; e < num_elements_; ++e) {
    const Element& el = mesh.element(e);
    int* d = dofs_.data() + static_cast<std::size_t>(e) * nl;
    int* s = signs_.data() + static_cast<std::size_t>(e) * nl;
    for (int f = 0; f < 3; ++f) {
      for (int k = 0; k < ni; ++k) d[f * ni + k] = block_offset_[f] + e * ni + k;
    }
    const int to = layout_.offset(TrialField::trace);
    for (int c = 0; c < 4; ++c) d[to + c] = block_offset_[3] + el.vertices[c];
    for (int edge = 0; edge < 4; ++edge) {
      for (int m = 0; m < p; ++m) {
        d[to + 4 + edge * p + m] = trace_edge_base + el.edges[edge] * p + m;
      }
    }
    const int fo = layout_.offset(TrialField::flux);
    for (int edge = 0; edge < 4; ++edge) {
      for (int m = 0; m <= p; ++m) {
        const int local = fo + layout_.flux_index(edge, m);
        d[local] = block_offset_[4] + el.edges[edge] * (p + 1) + m;
        s[local] = kOutwardSign[edge];
      }
    }
  }
}

int DofMap::block_offset(TrialField f) const {
  return block_offset_[static_cast<int>(f)];
}

int DofMap::block_size(TrialField f) const {
  return block_size_[static_cast<int>(f)];
}

std::span<const int> DofMap::element_dofs(int e) const {
  const auto n = static_cast<std::size_t>(layout_.total());
  return {dofs_.data() + e * n, n};
}

std::span<const int> DofMap::element_signs(int e) const {
  const auto n = static_cast<std::size_t>(layout_.total());
  return {signs_.data() + e * n, n};
}

DofMap build_dof_map(const StructuredMesh& mesh, int p) { return DofMap(mesh, p); }

std::vector<int> dirichlet_indices(const StructuredMesh& mesh, const DofMap& dofs) {
  const int p = dofs.order();
  const int base = dofs.block_offset(TrialField::trace);
  std::vector<int> out;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v)) out.push_back(base + v);
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edge(e).boundary) continue;
    for (int m = 0; m < p; ++m) out.push_back(base + mesh.num_vertices() + e * p + m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dpgcd
