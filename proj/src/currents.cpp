#include "vortexlab/currents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "vortexlab/csv.hpp"

namespace vortexlab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kCellMassFloor = 0.01 * kPi;
constexpr int kMergeRadiusCells = 2;
constexpr int kMaxDegreePerAtom = 20;
constexpr std::size_t kMaxUnitCharges = 4000;
}  // namespace

double AtomicCurrent::mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += std::abs(a.degree);
  return m;
}

int AtomicCurrent::total_degree() const {
  int d = 0;
  for (const auto& a : atoms) d += a.degree;
  return d;
}

AtomicCurrent AtomicCurrent::restricted_to(const Domain& U) const {
  AtomicCurrent out;
  for (const auto& a : atoms)
    if (U.contains(a.position)) out.atoms.push_back(a);
  return out;
}

AtomicCurrent atoms_from_csv(const std::string& path) {
  const auto tab = csv::read_file(path);
  const int cx = tab.column("x"), cy = tab.column("y"), cd = tab.column("degree");
  if (cx < 0 || cy < 0 || cd < 0)
    throw std::runtime_error("atoms CSV needs header x,y,degree: " + path);
  AtomicCurrent c;
  for (const auto& row : tab.rows)
    c.atoms.push_back({{row[cx], row[cy]}, int(std::lround(row[cd]))});
  return c;
}

void atoms_to_csv(const AtomicCurrent& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("atoms_to_csv: cannot open " + path);
  out << "x,y,degree\n";
  for (const auto& a : c.atoms) out << a.position.x << ',' << a.position.y << ',' << a.degree << '\n';
}

double JacobianMeasure::total() const {
  double t = 0.0;
  for (std::size_t i = 0; i < cell_mass.size(); ++i)
    if (cell_ok[i]) t += cell_mass[i];
  return t;
}

double JacobianMeasure::total_variation() const {
  double t = 0.0;
  for (std::size_t i = 0; i < cell_mass.size(); ++i)
    if (cell_ok[i]) t += std::abs(cell_mass[i]);
  return t;
}

Vec2 JacobianMeasure::cell_center(int i, int j) const {
  return geom.point2(i, j) + 0.5 * geom.eps * (geom.f1 + geom.f2);
}

JacobianMeasure jacobian_measure(const LatticeField& lf, Split split) {
  if (lf.geom.d != 2) throw std::invalid_argument("jacobian_measure: d=2 only");
  const auto& g = lf.geom;
  const KuhnMesh mesh(2, split);
  JacobianMeasure jm;
  jm.geom = g;
  jm.cell_mass.assign(g.count(), 0.0);
  jm.cell_ok.assign(g.count(), 0);
  for (int j = g.lo[1]; j < g.lo[1] + g.n[1] - 1; ++j)
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0] - 1; ++i) {
      if (!(lf.has(i, j) && lf.has(i + 1, j) && lf.has(i, j + 1) && lf.has(i + 1, j + 1)))
        continue;
      double mass = 0.0;
      for (const auto& sx : mesh.simplices()) {
        Vec2 p[3], u[3];
        for (int v = 0; v < 3; ++v) {
          p[v] = g.point2(i + sx.vertices[v][0], j + sx.vertices[v][1]);
          u[v] = lf.value(i + sx.vertices[v][0], j + sx.vertices[v][1]);
        }
        const double orient = cross(p[1] - p[0], p[2] - p[0]) >= 0.0 ? 1.0 : -1.0;
        mass += 0.5 * cross(u[1] - u[0], u[2] - u[0]) * orient;
      }
      const std::size_t idx = g.flat(i, j);
      jm.cell_mass[idx] = mass;
      jm.cell_ok[idx] = 1;
    }
  return jm;
}

VortexExtraction extract_vortices(const JacobianMeasure& jm, const Domain& dom, double threshold) {
  const auto& g = jm.geom;
  struct Candidate {
    int i, j;
    double mass;
    Vec2 center;
    int cluster = -1;
  };
  std::vector<Candidate> cand;
  for (int j = g.lo[1]; j < g.lo[1] + g.n[1]; ++j)
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
      const std::size_t idx = g.flat(i, j);
      if (!jm.cell_ok[idx] || std::abs(jm.cell_mass[idx]) < kCellMassFloor) continue;
      cand.push_back({i, j, jm.cell_mass[idx], jm.cell_center(i, j), -1});
    }

  // Union-find over same-signed candidates within the merge radius.
  std::vector<int> parent(cand.size());
  for (std::size_t n = 0; n < parent.size(); ++n) parent[n] = int(n);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < cand.size(); ++a)
    for (std::size_t b = a + 1; b < cand.size(); ++b) {
      if ((cand[a].mass > 0) != (cand[b].mass > 0)) continue;
      if (std::abs(cand[a].i - cand[b].i) <= kMergeRadiusCells &&
          std::abs(cand[a].j - cand[b].j) <= kMergeRadiusCells)
        parent[find(int(a))] = find(int(b));
    }

  struct Cluster {
    double mass = 0.0;
    Vec2 weighted{};
    std::vector<std::size_t> members;
  };
  std::vector<Cluster> clusters;
  std::vector<int> cluster_of(cand.size(), -1);
  for (std::size_t n = 0; n < cand.size(); ++n) {
    const int root = find(int(n));
    if (cluster_of[root] < 0) {
      cluster_of[root] = int(clusters.size());
      clusters.emplace_back();
    }
    auto& cl = clusters[cluster_of[root]];
    cl.mass += cand[n].mass;
    cl.weighted = cl.weighted + cand[n].mass * cand[n].center;
    cl.members.push_back(n);
  }

  VortexExtraction out;
  out.in_cluster.assign(g.count(), 0);
  for (const auto& cl : clusters) {
    if (std::abs(cl.mass) <= threshold * kPi) continue;  // stays in the residual
    const int degree = int(std::lround(cl.mass / kPi));
    if (std::abs(cl.mass - degree * kPi) > 0.25 * kPi || degree == 0) out.all_quantized = false;
    out.current.atoms.push_back({(1.0 / cl.mass) * cl.weighted, degree == 0 ? 1 : degree});
    for (std::size_t n : cl.members) out.in_cluster[g.flat(cand[n].i, cand[n].j)] = 1;
  }

  for (int j = g.lo[1]; j < g.lo[1] + g.n[1]; ++j)
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
      const std::size_t idx = g.flat(i, j);
      if (!jm.cell_ok[idx] || out.in_cluster[idx]) continue;
      const double m = std::abs(jm.cell_mass[idx]);
      if (m == 0.0) continue;
      out.residual_mass += m;
      const Vec2 c = jm.cell_center(i, j);
      out.residual_flat_bound += m * std::max(0.0, dom.boundary_distance(c));
    }
  return out;
}

AtomicCurrent winding_oracle(const LatticeField& lf) {
  if (lf.geom.d != 2) throw std::invalid_argument("winding_oracle: d=2 only");
  if (!lf.unit_values)
    throw std::invalid_argument("winding_oracle: lattice values must lie on S^1");
  const auto& g = lf.geom;
  auto angle = [](Vec2 a, Vec2 b) {
    const double cr = cross(a, b);
    const double dt = dot(a, b);
    if (cr == 0.0 && dt < 0.0)
      throw std::domain_error("winding_oracle: degree undefined on a plaquette (antipodal bond)");
    return std::atan2(cr, dt);
  };
  AtomicCurrent out;
  for (int j = g.lo[1]; j < g.lo[1] + g.n[1] - 1; ++j)
    for (int i = g.lo[0]; i < g.lo[0] + g.n[0] - 1; ++i) {
      if (!(lf.has(i, j) && lf.has(i + 1, j) && lf.has(i, j + 1) && lf.has(i + 1, j + 1)))
        continue;
      const Vec2 v00 = lf.value(i, j), v10 = lf.value(i + 1, j);
      const Vec2 v11 = lf.value(i + 1, j + 1), v01 = lf.value(i, j + 1);
      const double total = angle(v00, v10) + angle(v10, v11) + angle(v11, v01) + angle(v01, v00);
      const int degree = int(std::lround(total / (2.0 * kPi)));
      if (degree != 0)
        out.atoms.push_back({g.point2(i, j) + 0.5 * g.eps * (g.f1 + g.f2), degree});
    }
  return out;
}

double path_distance(const Domain& U, Vec2 a, Vec2 b) {
  if (U.shape() != Domain::Shape::annulus) return dist(a, b);
  const Vec2 c = U.center();
  const double r = U.inner_radius();
  // Distance from the hole center to the segment [a, b].
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  double seg_dist;
  if (len2 == 0.0) {
    seg_dist = dist(a, c);
  } else {
    const double t = std::clamp(dot(c - a, ab) / len2, 0.0, 1.0);
    seg_dist = dist(a + t * ab, c);
  }
  if (seg_dist >= r) return dist(a, b);
  // Tangent-arc geodesic around the hole.
  const double da = dist(a, c), db = dist(b, c);
  const double phi = std::abs(rotation_angle(a - c, b - c));
  const double wrap = phi - std::acos(std::clamp(r / da, -1.0, 1.0)) -
                      std::acos(std::clamp(r / db, -1.0, 1.0));
  return std::sqrt(std::max(0.0, da * da - r * r)) + std::sqrt(std::max(0.0, db * db - r * r)) +
         r * std::max(0.0, wrap);
}

namespace {

/// O(n^3) min-cost assignment on a square matrix (shortest augmenting
/// paths with potentials). Returns row -> column.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = int(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

struct UnitCharge {
  Vec2 position;
};

void expand_units(const AtomicCurrent& c, int sign, std::vector<UnitCharge>& pos,
                  std::vector<UnitCharge>& neg) {
  for (const auto& a : c.atoms) {
    if (std::abs(a.degree) > kMaxDegreePerAtom)
      throw std::invalid_argument("flat_norm: atom degree exceeds the cap of 20");
    const int d = sign * a.degree;
    auto& side = d > 0 ? pos : neg;
    for (int k = 0; k < std::abs(d); ++k) side.push_back({a.position});
  }
}

}  // namespace

FlatNormResult flat_norm(const AtomicCurrent& a, const AtomicCurrent& b, const Domain& U) {
  for (const auto& atom : a.atoms)
    if (!U.contains(atom.position)) throw std::invalid_argument("flat_norm: atom of a outside U");
  for (const auto& atom : b.atoms)
    if (!U.contains(atom.position)) throw std::invalid_argument("flat_norm: atom of b outside U");

  // Cancel exact-position coincidences of a - b before expanding.
  AtomicCurrent diff = a;
  for (const auto& atom : b.atoms) {
    bool merged = false;
    for (auto& d : diff.atoms)
      if (d.position == atom.position) {
        d.degree -= atom.degree;
        merged = true;
        break;
      }
    if (!merged) diff.atoms.push_back({atom.position, -atom.degree});
  }
  std::erase_if(diff.atoms, [](const VortexAtom& t) { return t.degree == 0; });

  std::vector<UnitCharge> pos, neg;
  expand_units(diff, +1, pos, neg);
  const std::size_t np = pos.size(), nn = neg.size();
  FlatNormResult out;
  if (np + nn == 0) return out;
  if (np + nn > kMaxUnitCharges)
    throw std::invalid_argument("flat_norm: too many unit charges (" + std::to_string(np + nn) +
                                " > " + std::to_string(kMaxUnitCharges) + ")");

  // Square assignment: rows = positives then nn dummies, columns =
  // negatives then np dummies. A real-dummy pairing is the boundary route
  // of the real charge; dummy-dummy costs nothing.
  const std::size_t n = np + nn;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i < np && j < nn) {
        cost[i][j] = path_distance(U, pos[i].position, neg[j].position);
      } else if (i < np) {
        cost[i][j] = U.boundary_distance(pos[i].position);
      } else if (j < nn) {
        cost[i][j] = U.boundary_distance(neg[j].position);
      }
    }
  const auto match = solve_assignment(cost);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = std::size_t(match[i]);
    if (i >= np && j >= nn) continue;  // dummy-dummy
    TransportLeg leg;
    leg.mass = kPi;
    if (i < np && j < nn) {
      leg.from = pos[i].position;
      leg.to = neg[j].position;
      leg.length = cost[i][j];
    } else if (i < np) {
      leg.from = pos[i].position;
      leg.to = U.closest_boundary_point(pos[i].position);
      leg.to_boundary = true;
      leg.length = cost[i][j];
    } else {
      leg.from = neg[j].position;
      leg.to = U.closest_boundary_point(neg[j].position);
      leg.to_boundary = true;
      leg.length = cost[i][j];
    }
    out.value += leg.mass * leg.length;
    out.plan.push_back(leg);
  }
  return out;
}

ConvergenceReport convergence_check(const std::vector<std::pair<double, Field>>& sequence,
                                    const AtomicCurrent& target, const Domain& dom,
                                    const std::vector<double>& margins) {
  for (const auto& atom : target.atoms) {
    for (double delta : margins)
      if (dom.boundary_distance(atom.position) <= delta)
        throw std::invalid_argument("convergence_check: target atom too close to the boundary");
  }

  ConvergenceReport report;
  for (const auto& [eps, field] : sequence) {
    const LatticeField lf = discretize(field, dom, eps);
    const JacobianMeasure jm = jacobian_measure(lf);
    const VortexExtraction ex = extract_vortices(jm, dom);
    for (double delta : margins) {
      const Domain U = dom.shrink(delta);
      const AtomicCurrent a = ex.current.restricted_to(U);
      const AtomicCurrent b = target.restricted_to(U);
      double d = flat_norm(a, b, U).value;
      // Residual transport bound over cells inside U.
      const auto& g = jm.geom;
      for (int j = g.lo[1]; j < g.lo[1] + g.n[1]; ++j)
        for (int i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i) {
          const std::size_t idx = g.flat(i, j);
          if (!jm.cell_ok[idx] || ex.in_cluster[idx]) continue;
          const Vec2 c = jm.cell_center(i, j);
          if (!U.contains(c)) continue;
          d += std::abs(jm.cell_mass[idx]) * U.boundary_distance(c);
        }
      report.rows.push_back({eps, delta, d, ex.all_quantized});
    }
  }

  for (std::size_t m = 0; m < margins.size(); ++m) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t r = m; r < report.rows.size(); r += margins.size()) {
      if (report.rows[r].distance > prev + 1e-12) report.nonincreasing_per_delta = false;
      prev = report.rows[r].distance;
    }
  }
  return report;
}

}  // namespace vortexlab
