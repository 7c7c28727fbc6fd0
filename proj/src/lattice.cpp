#include "vortexlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "vortexlab/parallel.hpp"

namespace vortexlab {

namespace {

constexpr double kAtomNudgeDist = 1e-9;

Vec2 eval_nudged(const Field& f, const std::vector<Vec2>& singular, Vec2 p, double nudge) {
  for (const Vec2 s : singular)
    if (dist(p, s) < kAtomNudgeDist) {
      p.x += nudge;
      break;
    }
  return f(p);
}

/// Frame coordinates of an ambient point: p = a f1 + b f2.
Vec2 to_frame(const LatticeGeometry& g, Vec2 p) {
  const double det = cross(g.f1, g.f2);
  return {cross(p, g.f2) / det, cross(g.f1, p) / det};
}

}  // namespace

KuhnMesh::KuhnMesh(int d, Split split) : d_(d), split_(split) {
  if (d != 2 && d != 3) throw std::invalid_argument("KuhnMesh: d must be 2 or 3");
  if (d == 3 && split != Split::kuhn)
    throw std::invalid_argument("KuhnMesh: d=3 supports only the Kuhn split");
  if (d == 2 && split == Split::kuhn) {
    simplices_ = {{{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {}}}, 3},
                  {{{{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {}}}, 3}};
  } else if (d == 2) {
    simplices_ = {{{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {}}}, 3},
                  {{{{1, 1, 0}, {0, 1, 0}, {1, 0, 0}, {}}}, 3}};
  } else {
    // Vertex chains 0 -> e_{s1} -> e_{s1}+e_{s2} -> (1,1,1), one per
    // permutation in lexicographic order.
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& s : perms) {
      Simplex sx;
      sx.nvert = 4;
      std::array<int, 3> v{0, 0, 0};
      sx.vertices[0] = v;
      v[s[0]] = 1;
      sx.vertices[1] = v;
      v[s[1]] = 1;
      sx.vertices[2] = v;
      v[s[2]] = 1;
      sx.vertices[3] = v;
      simplices_.push_back(sx);
    }
  }
}

KuhnMesh::Location KuhnMesh::locate(std::array<double, 3> x) const {
  Location loc;
  if (d_ == 2) {
    if (split_ == Split::kuhn) {
      if (x[0] >= x[1]) {
        loc.simplex = 0;
        loc.lambda = {1.0 - x[0], x[0] - x[1], x[1], 0.0};
      } else {
        loc.simplex = 1;
        loc.lambda = {1.0 - x[1], x[1] - x[0], x[0], 0.0};
      }
    } else {
      if (x[0] + x[1] <= 1.0) {
        loc.simplex = 0;
        loc.lambda = {1.0 - x[0] - x[1], x[0], x[1], 0.0};
      } else {
        loc.simplex = 1;
        loc.lambda = {x[0] + x[1] - 1.0, 1.0 - x[1], 1.0 - x[0], 0.0};
      }
    }
    return loc;
  }
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int s = 0; s < 6; ++s) {
    const auto& p = perms[s];
    if (x[p[0]] >= x[p[1]] && x[p[1]] >= x[p[2]]) {
      loc.simplex = s;
      loc.lambda = {1.0 - x[p[0]], x[p[0]] - x[p[1]], x[p[1]] - x[p[2]], x[p[2]]};
      return loc;
    }
  }
  throw std::logic_error("KuhnMesh::locate: no simplex matched");
}

double KuhnMesh::hat(std::array<int, 3> k, std::array<double, 3> x) const {
  // A hat is supported on the cubes adjacent to k; evaluate in the cube
  // containing x and pick up the weights of matching vertices.
  std::array<int, 3> cube{};
  std::array<double, 3> local{};
  for (int a = 0; a < d_; ++a) {
    cube[a] = int(std::floor(x[a]));
    local[a] = x[a] - cube[a];
  }
  const auto loc = locate(local);
  const auto& sx = simplices_[loc.simplex];
  double w = 0.0;
  for (int v = 0; v < sx.nvert; ++v) {
    bool match = true;
    for (int a = 0; a < d_; ++a) match = match && cube[a] + sx.vertices[v][a] == k[a];
    if (match) w += loc.lambda[v];
  }
  return w;
}

Vec2 cell_average(const Field& f, const Domain& dom, Vec2 corner, double edge, int m) {
  const auto singular = f.singular_points();
  const double sub = edge / m;
  Vec2 acc{};
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      const Vec2 p{corner.x + (a + 0.5) * sub, corner.y + (b + 0.5) * sub};
      if (!dom.contains(p)) continue;
      acc = acc + eval_nudged(f, singular, p, 0.5 * sub);
    }
  return (1.0 / double(m) / double(m)) * acc;
}

namespace {

LatticeGeometry make_geometry(const Domain& dom, double eps, Vec2 f1, Vec2 f2, Vec3 offset,
                              int extra_ring) {
  LatticeGeometry g;
  g.eps = eps;
  g.d = dom.dimension();
  g.f1 = f1;
  g.f2 = f2;
  g.offset = offset;
  const auto bb = dom.bounding_box();
  const Vec2 corners[4] = {{bb.lo.x, bb.lo.y}, {bb.hi.x, bb.lo.y}, {bb.lo.x, bb.hi.y},
                           {bb.hi.x, bb.hi.y}};
  double clo[2] = {1e300, 1e300}, chi[2] = {-1e300, -1e300};
  for (const Vec2 c : corners) {
    const Vec2 fc = to_frame(g, (1.0 / eps) * c);
    clo[0] = std::min(clo[0], fc.x - offset.x);
    chi[0] = std::max(chi[0], fc.x - offset.x);
    clo[1] = std::min(clo[1], fc.y - offset.y);
    chi[1] = std::max(chi[1], fc.y - offset.y);
  }
  for (int a = 0; a < 2; ++a) {
    g.lo[a] = int(std::floor(clo[a])) - extra_ring;
    g.n[a] = int(std::ceil(chi[a])) + extra_ring - g.lo[a] + 1;
  }
  if (g.d == 3) {
    g.lo[2] = int(std::floor(bb.lo.z / eps - offset.z)) - extra_ring;
    g.n[2] = int(std::ceil(bb.hi.z / eps - offset.z)) + extra_ring - g.lo[2] + 1;
  }
  return g;
}

}  // namespace

LatticeField discretize(const Field& f, const Domain& dom, double eps, int m) {
  if (eps >= dom.inradius())
    throw std::invalid_argument("discretize: eps must be smaller than the domain inradius");
  return discretize_rotated(f, dom, eps, {1.0, 0.0}, {}, m);
}

LatticeField discretize_rotated(const Field& f, const Domain& dom, double eps, Vec2 xi, Vec2 z,
                                int m) {
  if (norm2(xi) == 0.0) throw std::invalid_argument("discretize_rotated: xi must be nonzero");
  if (dom.dimension() == 3 && !(xi.x == 1.0 && xi.y == 0.0))
    throw std::invalid_argument("discretize_rotated: rotated lattices are d=2 only");
  const Vec2 xi_perp{xi.y, -xi.x};
  LatticeField lf;
  lf.geom = make_geometry(dom, eps, xi, xi_perp, {z.x, z.y, 0.0}, 1);
  lf.values.assign(lf.geom.count(), Vec2{});
  lf.populated.assign(lf.geom.count(), 0);
  lf.unit_values = false;  // averages generally leave S^1

  const auto singular = f.singular_points();
  const double edge = eps * norm(xi);
  const auto& g = lf.geom;
  const bool d3 = g.d == 3;

  parallel_for_items(std::size_t(g.n[1]) * g.n[2], [&](std::size_t row) {
    const int k = g.lo[2] + int(row / g.n[1]);
    const int j = g.lo[1] + int(row % g.n[1]);
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
      const Vec2 base = g.point2(i, j);
      // Refine the cell quadrature near vortex atoms.
      int mm = m;
      const Vec2 center = base + 0.5 * eps * (g.f1 + g.f2);
      for (const Vec2 s : singular)
        if (dist(center, s) < 1.5 * edge) mm = std::max(m, 16);
      const double sub = 1.0 / mm;
      Vec2 acc{};
      int hits = 0;
      const int mz = d3 ? mm : 1;
      for (int c = 0; c < mz; ++c) {
        const double pz = d3 ? eps * (k + g.offset.z + (c + 0.5) * sub) : 0.0;
        for (int b = 0; b < mm; ++b)
          for (int a = 0; a < mm; ++a) {
            const Vec2 p = base + (eps * (a + 0.5) * sub) * g.f1 + (eps * (b + 0.5) * sub) * g.f2;
            const bool in = d3 ? dom.contains(Vec3{p.x, p.y, pz}) : dom.contains(p);
            if (!in) continue;
            acc = acc + eval_nudged(f, singular, p, 0.5 * edge * sub);
            ++hits;
          }
      }
      if (hits == 0) continue;  // cell misses the domain
      const std::size_t idx = g.flat(i, j, k);
      lf.values[idx] = (1.0 / double(mm * mm * mz)) * acc;
      lf.populated[idx] = 1;
    }
  });
  return lf;
}

LatticeField sample(const Field& f, const Domain& dom, double eps, Vec2 xi, Vec2 z) {
  if (norm2(xi) == 0.0) throw std::invalid_argument("sample: xi must be nonzero");
  LatticeField lf;
  lf.geom = make_geometry(dom, eps, xi, {xi.y, -xi.x}, {z.x, z.y, 0.0}, 1);
  lf.values.assign(lf.geom.count(), Vec2{});
  lf.populated.assign(lf.geom.count(), 0);
  lf.unit_values = f.unit_valued();
  const auto singular = f.singular_points();
  const auto& g = lf.geom;
  parallel_for_items(std::size_t(g.n[1]), [&](std::size_t row) {
    const int j = g.lo[1] + int(row);
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
      const Vec2 p = g.point2(i, j);
      if (!dom.contains(p)) continue;
      const std::size_t idx = g.flat(i, j);
      lf.values[idx] = eval_nudged(f, singular, p, 0.5 * eps);
      lf.populated[idx] = 1;
    }
  });
  return lf;
}

LatticeField sample3(const Field& f, const Domain& dom, double eps, Vec3 z) {
  if (dom.dimension() != 3) throw std::invalid_argument("sample3: need a 3-D domain");
  LatticeField lf;
  lf.geom = make_geometry(dom, eps, {1.0, 0.0}, {0.0, 1.0}, z, 1);
  lf.values.assign(lf.geom.count(), Vec2{});
  lf.populated.assign(lf.geom.count(), 0);
  lf.unit_values = f.unit_valued();
  const auto singular = f.singular_points();
  const auto& g = lf.geom;
  for (int k = g.lo[2]; k < g.lo[2] + g.n[2]; ++k)
    for (int j = g.lo[1]; j < g.lo[1] + g.n[1]; ++j)
      for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
        const Vec3 p = g.point3(i, j, k);
        if (!dom.contains(p)) continue;
        const std::size_t idx = g.flat(i, j, k);
        lf.values[idx] = eval_nudged(f, singular, {p.x, p.y}, 0.5 * eps);
        lf.populated[idx] = 1;
      }
  return lf;
}

Vec2 interpolate(const LatticeField& lf, Vec2 x, Split split) {
  const auto& g = lf.geom;
  if (g.d != 2) throw std::invalid_argument("interpolate(Vec2): lattice is 3-D");
  const Vec2 c = to_frame(g, (1.0 / g.eps) * x) - Vec2{g.offset.x, g.offset.y};
  const int i = int(std::floor(c.x));
  const int j = int(std::floor(c.y));
  if (!(lf.has(i, j) && lf.has(i + 1, j) && lf.has(i, j + 1) && lf.has(i + 1, j + 1)))
    throw std::domain_error("interpolate: cell is not fully populated");
  static const KuhnMesh mesh_kuhn(2, Split::kuhn);
  static const KuhnMesh mesh_anti(2, Split::anti_diagonal);
  const KuhnMesh& mesh = split == Split::kuhn ? mesh_kuhn : mesh_anti;
  const auto loc = mesh.locate({c.x - i, c.y - j, 0.0});
  const auto& sx = mesh.simplices()[loc.simplex];
  Vec2 out{};
  for (int v = 0; v < sx.nvert; ++v)
    out = out + loc.lambda[v] * lf.value(i + sx.vertices[v][0], j + sx.vertices[v][1]);
  return out;
}

Vec2 interpolate(const LatticeField& lf, Vec3 x) {
  const auto& g = lf.geom;
  if (g.d != 3) throw std::invalid_argument("interpolate(Vec3): lattice is 2-D");
  const double cs[3] = {x.x / g.eps - g.offset.x, x.y / g.eps - g.offset.y,
                        x.z / g.eps - g.offset.z};
  int cell[3];
  double local[3];
  for (int a = 0; a < 3; ++a) {
    cell[a] = int(std::floor(cs[a]));
    local[a] = cs[a] - cell[a];
  }
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di)
        if (!lf.has(cell[0] + di, cell[1] + dj, cell[2] + dk))
          throw std::domain_error("interpolate: cell is not fully populated");
  static const KuhnMesh mesh(3, Split::kuhn);
  const auto loc = mesh.locate({local[0], local[1], local[2]});
  const auto& sx = mesh.simplices()[loc.simplex];
  Vec2 out{};
  for (int v = 0; v < sx.nvert; ++v)
    out = out + loc.lambda[v] * lf.value(cell[0] + sx.vertices[v][0], cell[1] + sx.vertices[v][1],
                                         cell[2] + sx.vertices[v][2]);
  return out;
}

namespace {

Mat2 affine_gradient(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 u0, Vec2 u1, Vec2 u2) {
  const Vec2 e1 = p1 - p0, e2 = p2 - p0;
  const Vec2 d1 = u1 - u0, d2 = u2 - u0;
  const double det = cross(e1, e2);
  // grad = [d1 d2] * [e1 e2]^{-1}
  return {(d1.x * e2.y - d2.x * e1.y) / det, (-d1.x * e2.x + d2.x * e1.x) / det,
          (d1.y * e2.y - d2.y * e1.y) / det, (-d1.y * e2.x + d2.y * e1.x) / det};
}

}  // namespace

Mat2 interpolation_gradient(const LatticeField& lf, int i, int j, int simplex, Split split) {
  if (lf.geom.d != 2) throw std::invalid_argument("interpolation_gradient: d=2 only");
  const KuhnMesh mesh(2, split);
  const auto& sx = mesh.simplices().at(simplex);
  Vec2 p[3], u[3];
  for (int v = 0; v < 3; ++v) {
    const int vi = i + sx.vertices[v][0];
    const int vj = j + sx.vertices[v][1];
    if (!lf.has(vi, vj)) throw std::domain_error("interpolation_gradient: unpopulated vertex");
    p[v] = lf.geom.point2(vi, vj);
    u[v] = lf.value(vi, vj);
  }
  return affine_gradient(p[0], p[1], p[2], u[0], u[1], u[2]);
}

XyResult xy_energy_detailed(const LatticeField& lf, const Domain& U) {
  const auto& g = lf.geom;
  const double scale = std::pow(g.eps, g.d - 2) / std::abs(std::log(g.eps));
  std::vector<double> partial(std::size_t(g.n[1]) * g.n[2], 0.0);
  std::vector<std::size_t> bonds(partial.size(), 0);

  parallel_for_items(partial.size(), [&](std::size_t row) {
    const int k = g.lo[2] + int(row / g.n[1]);
    const int j = g.lo[1] + int(row % g.n[1]);
    const int dirs2[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    double acc = 0.0;
    std::size_t count = 0;
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
      if (!lf.has(i, j, k)) continue;
      const bool in_u = g.d == 2 ? U.contains(g.point2(i, j)) : U.contains(g.point3(i, j, k));
      if (!in_u) continue;
      const Vec2 v = lf.value(i, j, k);
      auto bond = [&](int ni, int nj, int nk) {
        if (!lf.has(ni, nj, nk)) return;
        const bool nin = g.d == 2 ? U.contains(g.point2(ni, nj)) : U.contains(g.point3(ni, nj, nk));
        if (!nin) return;
        acc += norm2(v - lf.value(ni, nj, nk));
        ++count;
      };
      for (const auto& d : dirs2) bond(i + d[0], j + d[1], k);
      if (g.d == 3) {
        bond(i, j, k + 1);
        bond(i, j, k - 1);
      }
    }
    partial[row] = acc;
    bonds[row] = count;
  });
  XyResult out;
  out.value = scale * pairwise_sum(partial);
  for (std::size_t b : bonds) out.ordered_bonds += b;
  return out;
}

double xy_energy(const LatticeField& lf, const Domain& U) {
  return xy_energy_detailed(lf, U).value;
}

// ---------------------------------------------------------------------------
// Exact integration on the common refinement of two simplex partitions.

namespace {

struct Triangle {
  Vec2 p[3];
  Vec2 u[3];
  Mat2 grad;
  Vec2 bb_lo, bb_hi;
};

std::vector<Triangle> enumerate_triangles(const LatticeField& lf, Split split) {
  const auto& g = lf.geom;
  const KuhnMesh mesh(2, split);
  std::vector<Triangle> tris;
  for (int j = g.lo[1]; j < g.lo[1] + g.n[1] - 1; ++j)
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0] - 1; ++i) {
      if (!(lf.has(i, j) && lf.has(i + 1, j) && lf.has(i, j + 1) && lf.has(i + 1, j + 1)))
        continue;
      for (const auto& sx : mesh.simplices()) {
        Triangle t;
        for (int v = 0; v < 3; ++v) {
          const int vi = i + sx.vertices[v][0];
          const int vj = j + sx.vertices[v][1];
          t.p[v] = g.point2(vi, vj);
          t.u[v] = lf.value(vi, vj);
        }
        t.grad = affine_gradient(t.p[0], t.p[1], t.p[2], t.u[0], t.u[1], t.u[2]);
        t.bb_lo = {std::min({t.p[0].x, t.p[1].x, t.p[2].x}), std::min({t.p[0].y, t.p[1].y, t.p[2].y})};
        t.bb_hi = {std::max({t.p[0].x, t.p[1].x, t.p[2].x}), std::max({t.p[0].y, t.p[1].y, t.p[2].y})};
        tris.push_back(t);
      }
    }
  return tris;
}

using Polygon = std::vector<Vec2>;

Polygon clip_half_plane(const Polygon& poly, Vec2 a, Vec2 b) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double sp = cross(b - a, p - a);
    const double sq = cross(b - a, q - a);
    if (sp >= 0.0) out.push_back(p);
    if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
      const double t = sp / (sp - sq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

Polygon clip_to_triangle(Polygon poly, const Triangle& t) {
  // Ensure counter-clockwise clipper.
  Vec2 a = t.p[0], b = t.p[1], c = t.p[2];
  if (cross(b - a, c - a) < 0.0) std::swap(b, c);
  poly = clip_half_plane(poly, a, b);
  if (!poly.empty()) poly = clip_half_plane(poly, b, c);
  if (!poly.empty()) poly = clip_half_plane(poly, c, a);
  return poly;
}

double polygon_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % poly.size()];
    a += cross(p, q);
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(const Polygon& poly) {
  Vec2 c{};
  for (const Vec2 p : poly) c = c + p;
  return (1.0 / double(poly.size())) * c;
}

}  // namespace

std::pair<double, double> comparison_diagnostics(const LatticeField& a, const LatticeField& b,
                                                 const Domain& U, double eps, Split split) {
  const auto tris_a = enumerate_triangles(a, split);
  const auto tris_b = enumerate_triangles(b, split);
  if (tris_a.empty() || tris_b.empty())
    throw std::invalid_argument("comparison_diagnostics: a field has no populated cells");

  // Bin B triangles for overlap lookups.
  const double bin = std::max(a.geom.eps, b.geom.eps);
  Vec2 lo{1e300, 1e300};
  for (const auto& t : tris_b) lo = {std::min(lo.x, t.bb_lo.x), std::min(lo.y, t.bb_lo.y)};
  auto bin_index = [&](Vec2 p) {
    return std::pair<int, int>{int(std::floor((p.x - lo.x) / bin)),
                               int(std::floor((p.y - lo.y) / bin))};
  };
  std::vector<std::vector<std::size_t>> grid;
  int bnx = 0, bny = 0;
  {
    Vec2 hi{-1e300, -1e300};
    for (const auto& t : tris_b) hi = {std::max(hi.x, t.bb_hi.x), std::max(hi.y, t.bb_hi.y)};
    bnx = int(std::floor((hi.x - lo.x) / bin)) + 1;
    bny = int(std::floor((hi.y - lo.y) / bin)) + 1;
    grid.assign(std::size_t(bnx) * bny, {});
    for (std::size_t n = 0; n < tris_b.size(); ++n) {
      const auto [i0, j0] = bin_index(tris_b[n].bb_lo);
      const auto [i1, j1] = bin_index(tris_b[n].bb_hi);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
          if (i >= 0 && i < bnx && j >= 0 && j < bny) grid[std::size_t(j) * bnx + i].push_back(n);
    }
  }

  const bool rect_window = U.shape() == Domain::Shape::rectangle;
  const double area_floor = 1e-14 * eps * eps;
  double l2 = 0.0, grad2 = 0.0;
  std::vector<std::size_t> seen(tris_b.size(), SIZE_MAX);
  for (std::size_t na = 0; na < tris_a.size(); ++na) {
    const auto& ta = tris_a[na];
    const auto [i0, j0] = bin_index(ta.bb_lo);
    const auto [i1, j1] = bin_index(ta.bb_hi);
    for (int j = std::max(0, j0); j <= std::min(bny - 1, j1); ++j)
      for (int i = std::max(0, i0); i <= std::min(bnx - 1, i1); ++i)
        for (std::size_t nb : grid[std::size_t(j) * bnx + i]) {
          if (seen[nb] == na) continue;  // already intersected with this pair
          seen[nb] = na;
          const auto& tb = tris_b[nb];
          if (ta.bb_lo.x > tb.bb_hi.x || tb.bb_lo.x > ta.bb_hi.x || ta.bb_lo.y > tb.bb_hi.y ||
              tb.bb_lo.y > ta.bb_hi.y)
            continue;
          Polygon poly{ta.p[0], ta.p[1], ta.p[2]};
          if (cross(ta.p[1] - ta.p[0], ta.p[2] - ta.p[0]) < 0.0) std::swap(poly[1], poly[2]);
          poly = clip_to_triangle(poly, tb);
          if (poly.size() < 3) continue;
          if (rect_window) {
            const Vec2 rlo = U.rect_lo(), rhi = U.rect_hi();
            poly = clip_half_plane(poly, {rlo.x, rlo.y}, {rhi.x, rlo.y});
            if (poly.size() >= 3) poly = clip_half_plane(poly, {rhi.x, rlo.y}, {rhi.x, rhi.y});
            if (poly.size() >= 3) poly = clip_half_plane(poly, {rhi.x, rhi.y}, {rlo.x, rhi.y});
            if (poly.size() >= 3) poly = clip_half_plane(poly, {rlo.x, rhi.y}, {rlo.x, rlo.y});
            if (poly.size() < 3) continue;
          } else if (!U.contains(polygon_centroid(poly))) {
            continue;
          }
          const double area = polygon_area(poly);
          if (area < area_floor) continue;

          auto value_a = [&](Vec2 p) {
            const Vec2 d = p - ta.p[0];
            return Vec2{ta.u[0].x + ta.grad.a11 * d.x + ta.grad.a12 * d.y,
                        ta.u[0].y + ta.grad.a21 * d.x + ta.grad.a22 * d.y};
          };
          auto value_b = [&](Vec2 p) {
            const Vec2 d = p - tb.p[0];
            return Vec2{tb.u[0].x + tb.grad.a11 * d.x + tb.grad.a12 * d.y,
                        tb.u[0].y + tb.grad.a21 * d.x + tb.grad.a22 * d.y};
          };
          // |A-B|^2 is quadratic: the edge-midpoint rule per fan triangle
          // integrates it exactly.
          for (std::size_t v = 1; v + 1 < poly.size(); ++v) {
            const Vec2 q0 = poly[0], q1 = poly[v], q2 = poly[v + 1];
            const double tri_area = 0.5 * cross(q1 - q0, q2 - q0);
            const Vec2 mids[3] = {0.5 * (q0 + q1), 0.5 * (q1 + q2), 0.5 * (q0 + q2)};
            double s = 0.0;
            for (const Vec2 mp : mids) s += norm2(value_a(mp) - value_b(mp));
            l2 += tri_area / 3.0 * s;
          }
          const double gd = (ta.grad.a11 - tb.grad.a11) * (ta.grad.a11 - tb.grad.a11) +
                            (ta.grad.a12 - tb.grad.a12) * (ta.grad.a12 - tb.grad.a12) +
                            (ta.grad.a21 - tb.grad.a21) * (ta.grad.a21 - tb.grad.a21) +
                            (ta.grad.a22 - tb.grad.a22) * (ta.grad.a22 - tb.grad.a22);
          grad2 += area * gd;
        }
  }
  const double log_eps = std::abs(std::log(eps));
  return {l2 / (eps * eps * log_eps), grad2 / log_eps};
}

void dump_lattice_csv(const LatticeField& lf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_lattice_csv: cannot open " + path);
  out << "i,j,vx,vy\n";
  const auto& g = lf.geom;
  for (int j = g.lo[1]; j < g.lo[1] + g.n[1]; ++j)
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
      if (!lf.has(i, j)) continue;
      const Vec2 v = lf.value(i, j);
      out << i << ',' << j << ',' << v.x << ',' << v.y << '\n';
    }
}

}  // namespace vortexlab
