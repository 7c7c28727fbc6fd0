#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vortexlab/common.hpp"

namespace vortexlab {

struct BoundingBox {
  Vec3 lo;
  Vec3 hi;
};

/// Bounded Lipschitz domain from a fixed shape catalog. d=2 shapes are
/// Ball, Rectangle and Annulus; d=3 domains are 2-D shapes crossed with an
/// interval. Membership tests the open set; boundary_distance is exact for
/// every catalog shape.
class Domain {
 public:
  enum class Shape { ball, rectangle, annulus, product };

  static Domain ball(Vec2 center, double radius);
  static Domain rectangle(Vec2 lo, Vec2 hi);
  static Domain annulus(Vec2 center, double inner_radius, double outer_radius);
  /// base x (z0, z1), dimension 3. The base must be a 2-D shape.
  static Domain product(const Domain& base, double z0, double z1);

  int dimension() const { return dim_; }
  Shape shape() const { return shape_; }

  bool contains(Vec2 x) const;
  bool contains(Vec3 x) const;

  double boundary_distance(Vec2 x) const;
  double boundary_distance(Vec3 x) const;

  BoundingBox bounding_box() const;
  /// Radius of the largest ball around an interior point (shape-exact).
  double inradius() const;

  /// Compactly contained copy at distance >= delta from the boundary.
  /// Throws when delta meets or exceeds the inradius.
  Domain shrink(double delta) const;

  /// Closest point of the boundary (used by the flat-norm boundary sink).
  Vec2 closest_boundary_point(Vec2 x) const;

  // Shape parameters (meaningful subset depends on shape()).
  Vec2 center() const { return center_; }
  double outer_radius() const { return outer_r_; }
  double inner_radius() const { return inner_r_; }
  Vec2 rect_lo() const { return lo_; }
  Vec2 rect_hi() const { return hi_; }
  double z_lo() const { return z0_; }
  double z_hi() const { return z1_; }
  /// The 2-D factor of a product domain.
  Domain base() const;

 private:
  Domain() = default;
  int dim_ = 2;
  Shape shape_ = Shape::ball;
  Vec2 center_{};
  double outer_r_ = 0.0;
  double inner_r_ = 0.0;
  Vec2 lo_{}, hi_{};
  double z0_ = 0.0, z1_ = 0.0;
};

/// Parses "ball:R", "rect:lx,ly", "rect:x0,y0,x1,y1", "annulus:r,R" or
/// "cyl:R,h".
Domain parse_domain_spec(const std::string& spec);

struct VortexAtom {
  Vec2 position;
  int degree = 1;
};

/// u(x) = exp(i (phase + sum_l d_l arg(x - p_l))), evaluated with complex
/// products so no trigonometric call is needed per point.
struct MultiVortex {
  std::vector<VortexAtom> atoms;
  double phase = 0.0;
};

struct ConstantField {
  Vec2 value{1.0, 0.0};
};

/// u(x) = A x with a 2x2 matrix (rows are components).
struct LinearField {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;
};

/// Grid samples with bilinear interpolation between nodes. When
/// renormalize is set, interpolated values are projected back to S^1.
struct SampledField {
  Vec2 origin;
  double spacing = 1.0;
  int nx = 0, ny = 0;
  std::vector<Vec2> values;  // row-major, j * nx + i
  bool renormalize = true;
};

/// A field u: Omega -> R^2 (or S^1). In d=3 all fields are products
/// u(x) = w(x1, x2), so evaluation always takes the first two coordinates.
class Field {
 public:
  using Rule = std::variant<MultiVortex, ConstantField, LinearField, SampledField>;

  explicit Field(Rule rule);

  Vec2 operator()(Vec2 x) const;
  Vec2 operator()(Vec3 x) const { return (*this)(Vec2{x.x, x.y}); }

  bool unit_valued() const { return unit_; }
  const Rule& rule() const { return rule_; }

  /// Positions where the field is singular (vortex atoms).
  std::vector<Vec2> singular_points() const;

  /// Total degree of atoms strictly inside the given set.
  int degree_inside(const Domain& dom) const;

 private:
  Rule rule_;
  bool unit_ = true;
  Vec2 phase_factor_{1.0, 0.0};  // precomputed exp(i phase) for MultiVortex
};

Field make_vortex_field(std::vector<VortexAtom> atoms, double phase = 0.0);
Field make_constant_field(Vec2 value);
Field make_linear_field(double a11, double a12, double a21, double a22);
Field make_sampled_field(SampledField data);
Field sampled_field_from_csv(const std::string& path);

/// Parses "vortex:x,y,deg[;x,y,deg...]", "const:ux,uy",
/// "linear:a11,a12,a21,a22" or "sampled:path.csv".
Field parse_field_spec(const std::string& spec);

/// Evaluate Vec2-valued MultiVortex at x; shared by Field::operator() and
/// the hot quadrature loops.
inline Vec2 eval_vortex(const MultiVortex& mv, Vec2 phase_factor, Vec2 x) {
  Vec2 u = phase_factor;
  for (const auto& atom : mv.atoms) {
    const Vec2 delta = x - atom.position;
    const double n2 = norm2(delta);
    if (n2 == 0.0) throw std::domain_error("field evaluation at a vortex atom");
    const double inv = 1.0 / std::sqrt(n2);
    Vec2 w{delta.x * inv, delta.y * inv};
    int k = atom.degree;
    if (k < 0) {
      w = conj(w);
      k = -k;
    }
    for (int i = 0; i < k; ++i) u = cmul(u, w);
  }
  return u;
}

}  // namespace vortexlab
