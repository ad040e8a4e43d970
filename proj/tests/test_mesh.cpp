#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "dpgcd/mesh.hpp"

using namespace dpgcd;

TEST(Mesh, SingleElement) {
  const StructuredMesh m = build_mesh(1, 1);
  EXPECT_EQ(m.num_elements(), 1);
  EXPECT_EQ(m.num_edges(), 4);
  EXPECT_EQ(m.num_vertices(), 4);
}

TEST(Mesh, TenByTenCounts) {
  const StructuredMesh m = build_mesh(10, 10);
  EXPECT_EQ(m.num_elements(), 100);
  EXPECT_EQ(m.num_edges(), 10 * 11 + 10 * 11);
  EXPECT_EQ(m.num_vertices(), 121);
}

TEST(Mesh, TwoByThreeTopologyByEnumeration) {
  const StructuredMesh m = build_mesh(2, 3);
  EXPECT_EQ(m.num_elements(), 6);
  EXPECT_EQ(m.num_edges(), 17);
  // Count element incidences per edge directly from the element records.
  std::map<int, int> count;
  for (const Element& el : m.elements()) {
    for (int e : el.edges) ++count[e];
  }
  ASSERT_EQ(static_cast<int>(count.size()), m.num_edges());
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edge(e);
    EXPECT_EQ(count[e], ed.boundary ? 1 : 2);
    EXPECT_EQ(ed.elements[1] == -1, ed.boundary);
  }
}

TEST(Mesh, RejectsZeroCounts) {
  EXPECT_THROW(build_mesh(0, 3), std::invalid_argument);
  EXPECT_THROW(build_mesh(2, 0), std::invalid_argument);
}

TEST(MeshProperty, AreasAndGeometry) {
  for (int nx = 1; nx <= 5; ++nx) {
    for (int ny = 1; ny <= 5; ++ny) {
      const StructuredMesh m(nx, ny);
      double area = 0.0;
      for (const Element& el : m.elements()) {
        area += el.area();
        EXPECT_DOUBLE_EQ(el.hx, 1.0 / nx);
        EXPECT_DOUBLE_EQ(el.hy, 1.0 / ny);
        // Corners of the element are its vertices.
        for (int c = 0; c < 4; ++c) {
          const Point p = el.map(c % 2, c / 2);
          const Point v = m.vertex(el.vertices[c]);
          EXPECT_NEAR(p.x, v.x, 1e-15);
          EXPECT_NEAR(p.y, v.y, 1e-15);
        }
        // Local edges connect the documented corners.
        for (int le = 0; le < 4; ++le) {
          const Edge& ed = m.edge(el.edges[le]);
          std::set<int> a{ed.vertices[0], ed.vertices[1]};
          std::set<int> b{el.vertices[kEdgeCorners[le][0]], el.vertices[kEdgeCorners[le][1]]};
          EXPECT_EQ(a, b);
          EXPECT_EQ(ed.orientation, le < 2 ? EdgeOrientation::horizontal
                                           : EdgeOrientation::vertical);
        }
      }
      EXPECT_NEAR(area, 1.0, 1e-14);
      EXPECT_EQ(m.num_edges(), nx * (ny + 1) + ny * (nx + 1));
    }
  }
}

TEST(Mesh, EdgeStartIsLexicographicallySmaller) {
  const StructuredMesh m(3, 2);
  for (const Edge& e : m.edges()) {
    const Point a = m.vertex(e.vertices[0]);
    const Point b = m.vertex(e.vertices[1]);
    EXPECT_TRUE(a.x < b.x || (a.x == b.x && a.y < b.y));
  }
}

TEST(Mesh, NormalConvention) {
  const StructuredMesh m(2, 2);
  for (const Edge& e : m.edges()) {
    const Point n = e.normal();
    if (e.orientation == EdgeOrientation::horizontal) {
      EXPECT_EQ(n.y, 1.0);
    } else {
      EXPECT_EQ(n.x, 1.0);
    }
  }
}

TEST(Mesh, LocateUsesSmallerIndexOnSharedBoundary) {
  const StructuredMesh m(2, 2);
  EXPECT_EQ(m.locate({0.25, 0.25}), 0);
  EXPECT_EQ(m.locate({0.5, 0.25}), 0);
  EXPECT_EQ(m.locate({0.75, 0.5}), 1);
  EXPECT_EQ(m.locate({0.5, 0.5}), 0);
  EXPECT_EQ(m.locate({1.0, 1.0}), 3);
  EXPECT_EQ(m.locate({0.0, 0.0}), 0);
  EXPECT_THROW((void)m.locate({1.1, 0.5}), std::out_of_range);
  EXPECT_THROW((void)m.locate({0.5, -0.1}), std::out_of_range);
}

TEST(DofMap, TwentyEightLocalFunctionsForP1) {
  const DofMap d(build_mesh(3, 3), 1);
  EXPECT_EQ(d.num_local(), 28);
}

TEST(DofMap, TenByTenGlobalCount) {
  const DofMap d(build_mesh(10, 10), 1);
  EXPECT_EQ(d.num_global(), 1981);
  EXPECT_EQ(d.block_size(TrialField::sigma1) + d.block_size(TrialField::sigma2) +
                d.block_size(TrialField::u),
            1200);
  EXPECT_EQ(d.block_size(TrialField::trace), 341);
  EXPECT_EQ(d.block_size(TrialField::flux), 440);
}

// Counts the global dofs implied by the sharing rules, independently of the
// numbering code.
TEST(DofMap, GlobalCountByEnumeration) {
  for (int p = 1; p <= 4; ++p) {
    for (int n = 1; n <= 4; ++n) {
      const StructuredMesh m(n, n + 1);
      const DofMap d(m, p);
      std::set<int> all;
      for (int e = 0; e < m.num_elements(); ++e) {
        for (int g : d.element_dofs(e)) all.insert(g);
      }
      const int expect = 3 * (p + 1) * (p + 1) * m.num_elements() + m.num_vertices() +
                         p * m.num_edges() + (p + 1) * m.num_edges();
      EXPECT_EQ(d.num_global(), expect);
      // Every global index is referenced.
      EXPECT_EQ(static_cast<int>(all.size()), d.num_global());
      EXPECT_EQ(*all.begin(), 0);
      EXPECT_EQ(*all.rbegin(), d.num_global() - 1);
    }
  }
}

TEST(DofMap, SingleElementTraceAndFlux) {
  const DofMap d(build_mesh(1, 1), 1);
  EXPECT_EQ(d.block_size(TrialField::trace), 8);
  EXPECT_EQ(d.block_size(TrialField::flux), 8);
}

TEST(DofMap, RejectsP0) { EXPECT_THROW(DofMap(build_mesh(1, 1), 0), std::invalid_argument); }

TEST(DofMap, DirichletCounts) {
  {
    const StructuredMesh m(1, 1);
    const DofMap d(m, 1);
    EXPECT_EQ(dirichlet_indices(m, d).size(), 8u);
  }
  const StructuredMesh m(10, 10);
  const DofMap d(m, 1);
  const auto fixed = dirichlet_indices(m, d);
  EXPECT_EQ(fixed.size(), 80u);
  EXPECT_TRUE(std::is_sorted(fixed.begin(), fixed.end()));
  const int lo = d.block_offset(TrialField::flux);
  for (int g : fixed) {
    EXPECT_GE(g, d.block_offset(TrialField::trace));
    EXPECT_LT(g, lo);  // never a flux dof
  }
}

TEST(DofMapProperty, FluxSignsOppositeAcrossInteriorEdges) {
  const StructuredMesh m(4, 3);
  const DofMap d(m, 2);
  const LocalLayout& L = d.layout();
  std::map<int, std::vector<int>> signs;
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto g = d.element_dofs(e);
    const auto s = d.element_signs(e);
    for (int i = 0; i < L.total(); ++i) {
      if (L.field_of(i) == TrialField::flux) {
        signs[g[i]].push_back(s[i]);
      } else {
        EXPECT_EQ(s[i], 1);
      }
    }
  }
  for (const auto& [g, s] : signs) {
    if (s.size() == 2) EXPECT_EQ(s[0] + s[1], 0) << "global flux dof " << g;
  }
}

TEST(DofMapProperty, IncidenceMultiplicities) {
  const StructuredMesh m(3, 3);
  const DofMap d(m, 2);
  std::map<int, int> mult;
  int incidences = 0;
  for (int e = 0; e < m.num_elements(); ++e) {
    for (int g : d.element_dofs(e)) {
      ++mult[g];
      ++incidences;
    }
  }
  int sum = 0;
  for (const auto& [g, k] : mult) sum += k;
  EXPECT_EQ(sum, incidences);
  EXPECT_EQ(incidences, m.num_elements() * d.num_local());
  // Interior vertices are shared by four elements.
  const int vertex_block = d.block_offset(TrialField::trace);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Point p = m.vertex(v);
    const bool corner = (p.x == 0.0 || p.x == 1.0) && (p.y == 0.0 || p.y == 1.0);
    const int expect = corner ? 1 : m.is_boundary_vertex(v) ? 2 : 4;
    EXPECT_EQ(mult[vertex_block + v], expect);
  }
}

// The shared trace dofs describe the same function on an edge seen from
// either element.
TEST(DofMapProperty, SharedTraceAgreesOnEdges) {
  const StructuredMesh m(3, 2);
  const int p = 2;
  const DofMap d(m, p);
  const LocalLayout& L = d.layout();
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(d.num_global(), 0.3, 2.1).array().sin();
  const auto trace_at = [&](int e, int le, double s) {
    const auto g = d.element_dofs(e);
    double val = 0.0;
    for (int k = 0; k < L.trace(); ++k) {
      val += c(g[L.offset(TrialField::trace) + k]) * trace_shape(p, k, le, s);
    }
    return val;
  };
  for (int ed = 0; ed < m.num_edges(); ++ed) {
    const Edge& edge = m.edge(ed);
    if (edge.boundary) continue;
    for (double s : {0.0, 0.3, 0.71, 1.0}) {
      double vals[2];
      for (int k = 0; k < 2; ++k) {
        const Element& el = m.element(edge.elements[k]);
        const int le = static_cast<int>(std::find(el.edges.begin(), el.edges.end(), ed) -
                                        el.edges.begin());
        vals[k] = trace_at(edge.elements[k], le, s);
      }
      EXPECT_NEAR(vals[0], vals[1], 1e-13);
    }
  }
}
