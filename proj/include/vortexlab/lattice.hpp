#pragma once

#include <array>
#include <string>
#include <vector>

#include "vortexlab/fields.hpp"

namespace vortexlab {

/// Split convention for the square cell in d=2. The Kuhn decomposition
/// cuts along the main diagonal {x1 = x2}; the anti-diagonal variant cuts
/// along {x1 + x2 = 1}. d=3 always uses the Kuhn decomposition (6
/// simplices along coordinate-monotone vertex chains).
enum class Split { kuhn, anti_diagonal };

/// Simplicial decomposition of the unit cube together with barycentric
/// location queries. The induced hat functions form a partition of unity
/// with lambda_k(k) = 1.
class KuhnMesh {
 public:
  struct Simplex {
    std::array<std::array<int, 3>, 4> vertices{};  // corner offsets in {0,1}^d
    int nvert = 0;
  };

  KuhnMesh(int d, Split split = Split::kuhn);

  int dimension() const { return d_; }
  const std::vector<Simplex>& simplices() const { return simplices_; }

  struct Location {
    int simplex = 0;
    std::array<double, 4> lambda{};
  };
  /// Locates a point of the unit cube; ties on simplex facets resolve to
  /// the lowest simplex index.
  Location locate(std::array<double, 3> local) const;

  /// Hat function of lattice vertex k evaluated at x (unit lattice).
  double hat(std::array<int, 3> k, std::array<double, 3> x) const;

 private:
  int d_;
  Split split_;
  std::vector<Simplex> simplices_;
};

/// Placement of a (possibly rotated and translated) lattice: lattice points
/// are eps * ((i + z1) f1 + (j + z2) f2) in d=2, plus a third axis-aligned
/// coordinate in d=3. Ambient cells are spanned by eps f1 and eps f2.
struct LatticeGeometry {
  double eps = 0.1;
  int d = 2;
  Vec2 f1{1.0, 0.0};
  Vec2 f2{0.0, 1.0};
  Vec3 offset{};  // in cell units

  std::array<int, 3> lo{};  // inclusive index lower corner
  std::array<int, 3> n{0, 0, 1};

  std::size_t count() const { return std::size_t(n[0]) * n[1] * n[2]; }
  std::size_t flat(int i, int j, int k = 0) const {
    return (std::size_t(k - lo[2]) * n[1] + (j - lo[1])) * n[0] + (i - lo[0]);
  }
  bool in_box(int i, int j, int k = 0) const {
    return i >= lo[0] && i < lo[0] + n[0] && j >= lo[1] && j < lo[1] + n[1] && k >= lo[2] &&
           k < lo[2] + n[2];
  }
  Vec2 point2(int i, int j) const {
    return eps * ((i + offset.x) * f1 + (j + offset.y) * f2);
  }
  Vec3 point3(int i, int j, int k) const {
    const Vec2 p = point2(i, j);
    return {p.x, p.y, eps * (k + offset.z)};
  }
};

/// Discrete map on a lattice; values live on the populated subset of the
/// index box.
struct LatticeField {
  LatticeGeometry geom;
  std::vector<Vec2> values;
  std::vector<uint8_t> populated;
  bool unit_values = false;

  bool has(int i, int j, int k = 0) const {
    return geom.in_box(i, j, k) && populated[geom.flat(i, j, k)];
  }
  Vec2 value(int i, int j, int k = 0) const { return values[geom.flat(i, j, k)]; }
};

/// Cell-average discretization: value at index i is the average of f over
/// the cell eps(i + [0,1]^d) intersected with the domain, divided by the
/// full cell volume, by m^d midpoint points per cell (refined near vortex
/// atoms). Cells with no quadrature point inside the domain are omitted.
LatticeField discretize(const Field& f, const Domain& dom, double eps, int m = 4);

/// Cell averages on the rotated lattice Z xi + Z xi_perp with
/// xi_perp = (xi2, -xi1), cells eps k + eps([0,1] xi + [0,1] xi_perp),
/// translated by z in cell units. d=2 only.
LatticeField discretize_rotated(const Field& f, const Domain& dom, double eps, Vec2 xi,
                                Vec2 z = {}, int m = 4);

/// Pointwise samples u(eps(k + z)) on an optionally rotated lattice.
/// Sample points within 1e-9 of a vortex atom are nudged by eps/2 along f1.
LatticeField sample(const Field& f, const Domain& dom, double eps, Vec2 xi = {1.0, 0.0},
                    Vec2 z = {});
LatticeField sample3(const Field& f, const Domain& dom, double eps, Vec3 z = {});

/// Average of f over the axis-aligned square cell [corner, corner+edge]^2
/// by m^2 midpoint points (full-area denominator, domain-restricted
/// numerator). Shared by discretize and by difference-quotient checks.
Vec2 cell_average(const Field& f, const Domain& dom, Vec2 corner, double edge, int m);

/// Piecewise-affine interpolation value at x. Requires every corner of the
/// cube cell containing x to be populated; throws std::domain_error
/// otherwise.
Vec2 interpolate(const LatticeField& lf, Vec2 x, Split split = Split::kuhn);
Vec2 interpolate(const LatticeField& lf, Vec3 x);

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
};

/// Constant gradient of the interpolation on one simplex of the cell with
/// base index (i, j); rows are value components, columns space directions.
/// d=2 only.
Mat2 interpolation_gradient(const LatticeField& lf, int i, int j, int simplex,
                            Split split = Split::kuhn);

/// Discrete XY energy over U:
/// (1/|log eps|) sum over ordered nearest-neighbour pairs of
/// eps^{d-2} |v_i - v_j|^2, both lattice points in U and populated. Each
/// bond is counted twice (ordered-pair convention).
double xy_energy(const LatticeField& lf, const Domain& U);

struct XyResult {
  double value = 0.0;
  std::size_t ordered_bonds = 0;
};
XyResult xy_energy_detailed(const LatticeField& lf, const Domain& U);

/// The two scaled comparison quantities for piecewise-affine fields A, B:
///   ( 1/(eps^2 |log eps|) int_U |A-B|^2,  1/|log eps| int_U |grad A - grad B|^2 ),
/// integrated exactly on the common refinement of the two simplex
/// partitions. Clipping against U is exact for rectangles; for curved
/// windows a fragment counts when its centroid lies in U.
std::pair<double, double> comparison_diagnostics(const LatticeField& a, const LatticeField& b,
                                                 const Domain& U, double eps,
                                                 Split split = Split::kuhn);

/// Writes the lattice as CSV "i,j,vx,vy".
void dump_lattice_csv(const LatticeField& lf, const std::string& path);

}  // namespace vortexlab
