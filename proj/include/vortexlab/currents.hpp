#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/lattice.hpp"

namespace vortexlab {

/// Integer-weighted vortex measure pi * sum_l d_l delta_{x_l}; degrees are
/// stored as the integers d_l, the factor pi enters at norm evaluation.
struct AtomicCurrent {
  std::vector<VortexAtom> atoms;

  /// ||M|| = sum |d_l|.
  double mass() const;
  /// Atoms strictly inside U.
  AtomicCurrent restricted_to(const Domain& U) const;
  int total_degree() const;
};

AtomicCurrent atoms_from_csv(const std::string& path);
void atoms_to_csv(const AtomicCurrent& c, const std::string& path);

/// Signed per-cell masses int_cell det(grad A) dx of a piecewise-affine
/// interpolant, on the cell grid of the source lattice.
struct JacobianMeasure {
  LatticeGeometry geom;           // cells are indexed by their base vertex
  std::vector<double> cell_mass;  // flat over geom's index box
  std::vector<uint8_t> cell_ok;   // cell had all four corners populated
  double total() const;
  double total_variation() const;
  Vec2 cell_center(int i, int j) const;
};

/// d=2 only. Per cell, the sum over its two simplices of the exact
/// integral of the affine Jacobian: (1/2) cross(u1-u0, u2-u0) times the
/// ambient orientation sign, so rotated frames are handled uniformly.
JacobianMeasure jacobian_measure(const LatticeField& lf, Split split = Split::kuhn);

struct VortexExtraction {
  AtomicCurrent current;
  bool all_quantized = true;   // every cluster within pi/4 of an integer mass
  double residual_mass = 0.0;  // sum |mass| over cells outside accepted clusters
  double residual_flat_bound = 0.0;  // cost of routing the residual to the boundary
  std::vector<uint8_t> in_cluster;   // aligned with jm.cell_mass
};

/// Clusters contiguous signed cell masses into atoms. A cluster is accepted
/// when its |mass| exceeds threshold * pi; its atom sits at the
/// mass-weighted centroid with degree round(mass / pi). Cells with
/// |mass| below 1% of pi never seed clusters; same-signed cells within two
/// cells of each other merge.
VortexExtraction extract_vortices(const JacobianMeasure& jm, const Domain& dom,
                                  double threshold = 0.5);

/// Independent degree count: per plaquette, the winding is the sum of the
/// four principal angle differences divided by 2 pi. Exact integers for
/// S^1-valued data; throws on an antipodal bond.
AtomicCurrent winding_oracle(const LatticeField& lf);

struct TransportLeg {
  Vec2 from;
  Vec2 to;
  bool to_boundary = false;
  double mass = 0.0;  // pi per unit charge
  double length = 0.0;
};

struct FlatNormResult {
  double value = 0.0;
  std::vector<TransportLeg> plan;
};

/// Flat distance F_U(a - b) between atomic currents supported in U,
/// computed as a min-cost matching of unit charges: a positive unit either
/// pairs with a negative unit (cost pi * distance within U) or routes to
/// the boundary (cost pi * boundary distance). Distances are Euclidean,
/// except in an annulus where paths bend around the hole. Exact for
/// moderate charge counts; per-atom degrees are capped at 20.
FlatNormResult flat_norm(const AtomicCurrent& a, const AtomicCurrent& b, const Domain& U);

/// Shortest path between two points of U staying inside the closed window
/// (tangent-arc geodesic around the hole of an annulus, straight segment
/// otherwise).
double path_distance(const Domain& U, Vec2 a, Vec2 b);

struct ConvergenceRow {
  double eps = 0.0;
  double delta = 0.0;
  double distance = 0.0;
  bool quantized = true;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // ordered by eps descending, then delta
  bool nonincreasing_per_delta = true;
};

/// Flat-convergence table: for each eps and each margin delta, the flat
/// distance in U = shrink(dom, delta) between the extracted vortex current
/// of the discretized field and the target, plus the residual transport
/// bound. Currents are restricted to U before comparison.
ConvergenceReport convergence_check(const std::vector<std::pair<double, Field>>& sequence,
                                    const AtomicCurrent& target, const Domain& dom,
                                    const std::vector<double>& margins);

}  // namespace vortexlab
