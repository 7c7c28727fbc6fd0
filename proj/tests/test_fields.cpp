#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vortexlab/fields.hpp"

using namespace vortexlab;
namespace {
constexpr double kPi = std::numbers::pi;

// Independent phase oracle: theta(x) = phase + sum_l d_l arg(x - p_l)
// evaluated with atan2 sums.
Vec2 vortex_by_angles(const MultiVortex& mv, Vec2 x) {
  double theta = mv.phase;
  for (const auto& a : mv.atoms)
    theta += a.degree * std::atan2(x.y - a.position.y, x.x - a.position.x);
  return {std::cos(theta), std::sin(theta)};
}

// Discrete winding of f along an n-gon circle.
int discrete_winding(const Field& f, Vec2 center, double radius, int n = 360) {
  double total = 0.0;
  Vec2 prev = f(Vec2{center.x + radius, center.y});
  for (int i = 1; i <= n; ++i) {
    const double th = 2.0 * kPi * i / n;
    const Vec2 cur = f(Vec2{center.x + radius * std::cos(th), center.y + radius * std::sin(th)});
    total += rotation_angle(prev, cur);
    prev = cur;
  }
  return int(std::lround(total / (2.0 * kPi)));
}
}  // namespace

TEST_CASE("domain boundary distances are exact on the catalog") {
  const Domain ball = Domain::ball({0, 0}, 1.0);
  CHECK(ball.boundary_distance(Vec2{0, 0}) == doctest::Approx(1.0).epsilon(1e-12));

  const Domain rect = Domain::rectangle({0, 0}, {1, 1});
  CHECK(rect.boundary_distance(Vec2{0.1, 0.5}) == doctest::Approx(0.1).epsilon(1e-12));

  const Domain ann = Domain::annulus({0, 0}, 0.25, 1.0);
  CHECK(ann.boundary_distance(Vec2{0.5, 0.0}) == doctest::Approx(0.25).epsilon(1e-12));

  const Domain cyl = Domain::product(Domain::ball({0, 0}, 1.0), 0.0, 1.0);
  CHECK(cyl.boundary_distance(Vec3{0.0, 0.0, 0.2}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(cyl.contains(Vec3{0.5, 0.0, 0.5}));
  CHECK_FALSE(cyl.contains(Vec3{0.5, 0.0, 1.5}));
}

TEST_CASE("membership implies inside the bounding box") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (const Domain& dom : {Domain::ball({0.2, -0.1}, 0.8), Domain::rectangle({-1, 0}, {0.5, 2}),
                            Domain::annulus({0, 0}, 0.3, 1.2)}) {
    const auto bb = dom.bounding_box();
    for (int i = 0; i < 2000; ++i) {
      const Vec2 p{unif(rng), unif(rng)};
      if (!dom.contains(p)) continue;
      CHECK(p.x >= bb.lo.x);
      CHECK(p.x <= bb.hi.x);
      CHECK(p.y >= bb.lo.y);
      CHECK(p.y <= bb.hi.y);
      CHECK(dom.boundary_distance(p) >= 0.0);
    }
  }
}

TEST_CASE("shrink preserves shape and keeps the margin") {
  const Domain b = Domain::ball({0, 0}, 1.0).shrink(0.1);
  CHECK(b.outer_radius() == doctest::Approx(0.9));

  const Domain r = Domain::rectangle({0, 0}, {1, 1}).shrink(0.25);
  CHECK(r.rect_lo().x == doctest::Approx(0.25));
  CHECK(r.rect_hi().y == doctest::Approx(0.75));

  const Domain a = Domain::annulus({0, 0}, 0.2, 1.0).shrink(0.05);
  CHECK(a.inner_radius() == doctest::Approx(0.25));
  CHECK(a.outer_radius() == doctest::Approx(0.95));

  CHECK_THROWS_AS(Domain::ball({0, 0}, 1.0).shrink(1.0), std::invalid_argument);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Domain dom = Domain::annulus({0, 0}, 0.2, 1.0);
  const Domain small = dom.shrink(0.15);
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p{unif(rng), unif(rng)};
    if (!small.contains(p)) continue;
    CHECK(dom.contains(p));
    CHECK(dom.boundary_distance(p) >= 0.15 - 1e-12);
  }
}

TEST_CASE("single vortex evaluations") {
  const Field f = make_vortex_field({{{0, 0}, 1}});
  const Vec2 a = f(Vec2{1, 0});
  CHECK(a.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.y == doctest::Approx(0.0));
  const Vec2 b = f(Vec2{0, 2});
  CHECK(b.x == doctest::Approx(0.0));
  CHECK(b.y == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(f(Vec2{0, 0}), std::domain_error);
}

TEST_CASE("dipole value at the midpoint matches the angle-sum oracle") {
  const MultiVortex mv{{{{-0.2, 0.0}, 1}, {{0.2, 0.0}, -1}}, 0.0};
  const Field f = make_vortex_field(mv.atoms, mv.phase);
  const Vec2 got = f(Vec2{0, 0});
  const Vec2 expect = vortex_by_angles(mv, {0, 0});
  CHECK(got.x == doctest::Approx(expect.x).epsilon(1e-12));
  CHECK(got.y == doctest::Approx(expect.y).epsilon(1e-12));
  // arg contributions: 0 from the +1 atom, pi from the -1 atom => (-1, 0).
  CHECK(got.x == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(got.y) < 1e-12);
}

TEST_CASE("multi-vortex equals the angle-sum oracle at random points") {
  const MultiVortex mv{{{{-0.3, 0.1}, 2}, {{0.4, -0.2}, -1}, {{0.0, 0.5}, 1}}, 0.7};
  const Field f = make_vortex_field(mv.atoms, mv.phase);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p{unif(rng), unif(rng)};
    bool near = false;
    for (const auto& a : mv.atoms) near = near || dist(p, a.position) < 1e-3;
    if (near) continue;
    const Vec2 got = f(p);
    const Vec2 expect = vortex_by_angles(mv, p);
    CHECK(got.x == doctest::Approx(expect.x).epsilon(1e-10));
    CHECK(got.y == doctest::Approx(expect.y).epsilon(1e-10));
  }
}

TEST_CASE("unit-circle fields stay on the circle") {
  const Field f = make_vortex_field({{{0.1, -0.2}, 1}, {{-0.4, 0.3}, -2}}, 0.3);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const Vec2 p{unif(rng), unif(rng)};
    if (dist(p, {0.1, -0.2}) < 1e-6 || dist(p, {-0.4, 0.3}) < 1e-6) continue;
    CHECK(std::abs(norm(f(p)) - 1.0) < 1e-12);
  }
}

TEST_CASE("discrete winding counts enclosed degrees exactly") {
  const Field f = make_vortex_field({{{-0.2, 0.0}, 1}, {{0.2, 0.0}, -1}, {{0.5, 0.5}, 2}});
  CHECK(discrete_winding(f, {-0.2, 0.0}, 0.1) == 1);
  CHECK(discrete_winding(f, {0.2, 0.0}, 0.1) == -1);
  CHECK(discrete_winding(f, {0.5, 0.5}, 0.1) == 2);
  CHECK(discrete_winding(f, {0.0, 0.0}, 0.3) == 0);   // dipole cancels
  CHECK(discrete_winding(f, {0.1, 0.1}, 0.8) == 2);   // all three
}

TEST_CASE("constant and linear fields") {
  const Field c = make_constant_field({0, 1});
  CHECK(c(Vec2{3, 4}).y == 1.0);
  CHECK(c.unit_valued());

  const Field lin = make_linear_field(1, 2, 3, 4);
  const Vec2 v = lin(Vec2{1, 1});
  CHECK(v.x == doctest::Approx(3.0));
  CHECK(v.y == doctest::Approx(7.0));
  CHECK_FALSE(lin.unit_valued());
}

TEST_CASE("phase rotates the whole field") {
  const double phi = 0.9;
  const Field f0 = make_vortex_field({{{0, 0}, 1}});
  const Field f1 = make_vortex_field({{{0, 0}, 1}}, phi);
  const Vec2 p{0.3, -0.7};
  const Vec2 rot = cmul({std::cos(phi), std::sin(phi)}, f0(p));
  const Vec2 got = f1(p);
  CHECK(got.x == doctest::Approx(rot.x).epsilon(1e-12));
  CHECK(got.y == doctest::Approx(rot.y).epsilon(1e-12));
}

TEST_CASE("sampled fields interpolate bilinearly and renormalize") {
  SampledField s;
  s.origin = {0, 0};
  s.spacing = 1.0;
  s.nx = 2;
  s.ny = 2;
  s.values = {{1, 0}, {0, 1}, {0, 1}, {-1, 0}};
  s.renormalize = false;
  const Field f = make_sampled_field(s);
  const Vec2 mid = f(Vec2{0.5, 0.5});
  CHECK(mid.x == doctest::Approx(0.0));
  CHECK(mid.y == doctest::Approx(0.5));

  s.renormalize = true;
  const Field g = make_sampled_field(s);
  CHECK(norm(g(Vec2{0.5, 0.5})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spec string parsing round trips the catalogs") {
  CHECK(parse_domain_spec("ball:1").outer_radius() == 1.0);
  CHECK(parse_domain_spec("rect:2,3").rect_hi().y == 3.0);
  CHECK(parse_domain_spec("rect:-1,-1,1,1").rect_lo().x == -1.0);
  CHECK(parse_domain_spec("annulus:0.2,1").inner_radius() == 0.2);
  CHECK(parse_domain_spec("cyl:1,2").dimension() == 3);
  CHECK_THROWS(parse_domain_spec("hexagon:1"));

  const Field f = parse_field_spec("vortex:-0.2,0,1;0.2,0,-1");
  CHECK(std::get<MultiVortex>(f.rule()).atoms.size() == 2);
  CHECK(parse_field_spec("const:1,0").unit_valued());
  CHECK_THROWS(parse_field_spec("spiral:1"));
}
