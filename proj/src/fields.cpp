#include "vortexlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vortexlab/csv.hpp"

namespace vortexlab {

namespace {
double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }
}  // namespace

Domain Domain::ball(Vec2 center, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("Domain::ball: radius must be positive");
  Domain d;
  d.shape_ = Shape::ball;
  d.center_ = center;
  d.outer_r_ = radius;
  return d;
}

Domain Domain::rectangle(Vec2 lo, Vec2 hi) {
  if (!(lo.x < hi.x && lo.y < hi.y)) throw std::invalid_argument("Domain::rectangle: empty");
  Domain d;
  d.shape_ = Shape::rectangle;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

Domain Domain::annulus(Vec2 center, double inner_radius, double outer_radius) {
  if (!(0.0 < inner_radius && inner_radius < outer_radius))
    throw std::invalid_argument("Domain::annulus: need 0 < r < R");
  Domain d;
  d.shape_ = Shape::annulus;
  d.center_ = center;
  d.inner_r_ = inner_radius;
  d.outer_r_ = outer_radius;
  return d;
}

Domain Domain::product(const Domain& base, double z0, double z1) {
  if (base.dim_ != 2 || base.shape_ == Shape::product)
    throw std::invalid_argument("Domain::product: base must be 2-D");
  if (!(z0 < z1)) throw std::invalid_argument("Domain::product: empty interval");
  Domain d = base;
  d.dim_ = 3;
  d.shape_ = Shape::product;
  d.z0_ = z0;
  d.z1_ = z1;
  return d;
}

Domain Domain::base() const {
  if (shape_ != Shape::product) throw std::logic_error("Domain::base: not a product domain");
  Domain d = *this;
  d.dim_ = 2;
  // Recover the 2-D shape tag from the stored parameters.
  d.shape_ = inner_r_ > 0.0 ? Shape::annulus : (outer_r_ > 0.0 ? Shape::ball : Shape::rectangle);
  d.z0_ = d.z1_ = 0.0;
  return d;
}

bool Domain::contains(Vec2 x) const {
  switch (shape_) {
    case Shape::ball:
      return norm2(x - center_) < outer_r_ * outer_r_;
    case Shape::rectangle:
      return lo_.x < x.x && x.x < hi_.x && lo_.y < x.y && x.y < hi_.y;
    case Shape::annulus: {
      const double r2 = norm2(x - center_);
      return inner_r_ * inner_r_ < r2 && r2 < outer_r_ * outer_r_;
    }
    case Shape::product:
      throw std::logic_error("Domain::contains(Vec2) on a 3-D domain");
  }
  return false;
}

bool Domain::contains(Vec3 x) const {
  if (shape_ != Shape::product) throw std::logic_error("Domain::contains(Vec3) on a 2-D domain");
  if (!(z0_ < x.z && x.z < z1_)) return false;
  return base().contains(Vec2{x.x, x.y});
}

double Domain::boundary_distance(Vec2 x) const {
  switch (shape_) {
    case Shape::ball:
      return outer_r_ - dist(x, center_);
    case Shape::rectangle:
      return std::min(std::min(x.x - lo_.x, hi_.x - x.x), std::min(x.y - lo_.y, hi_.y - x.y));
    case Shape::annulus: {
      const double r = dist(x, center_);
      return std::min(r - inner_r_, outer_r_ - r);
    }
    case Shape::product:
      throw std::logic_error("Domain::boundary_distance(Vec2) on a 3-D domain");
  }
  return 0.0;
}

double Domain::boundary_distance(Vec3 x) const {
  if (shape_ != Shape::product)
    throw std::logic_error("Domain::boundary_distance(Vec3) on a 2-D domain");
  return std::min(base().boundary_distance(Vec2{x.x, x.y}), std::min(x.z - z0_, z1_ - x.z));
}

BoundingBox Domain::bounding_box() const {
  switch (shape_) {
    case Shape::ball:
    case Shape::annulus:
      return {{center_.x - outer_r_, center_.y - outer_r_, 0.0},
              {center_.x + outer_r_, center_.y + outer_r_, 0.0}};
    case Shape::rectangle:
      return {{lo_.x, lo_.y, 0.0}, {hi_.x, hi_.y, 0.0}};
    case Shape::product: {
      auto bb = base().bounding_box();
      bb.lo.z = z0_;
      bb.hi.z = z1_;
      return bb;
    }
  }
  return {};
}

double Domain::inradius() const {
  switch (shape_) {
    case Shape::ball:
      return outer_r_;
    case Shape::rectangle:
      return 0.5 * std::min(hi_.x - lo_.x, hi_.y - lo_.y);
    case Shape::annulus:
      return 0.5 * (outer_r_ - inner_r_);
    case Shape::product:
      return std::min(base().inradius(), 0.5 * (z1_ - z0_));
  }
  return 0.0;
}

Domain Domain::shrink(double delta) const {
  if (delta <= 0.0) throw std::invalid_argument("Domain::shrink: delta must be positive");
  if (delta >= inradius())
    throw std::invalid_argument("Domain::shrink: delta exceeds the inradius (empty result)");
  switch (shape_) {
    case Shape::ball:
      return ball(center_, outer_r_ - delta);
    case Shape::rectangle:
      return rectangle({lo_.x + delta, lo_.y + delta}, {hi_.x - delta, hi_.y - delta});
    case Shape::annulus:
      return annulus(center_, inner_r_ + delta, outer_r_ - delta);
    case Shape::product:
      return product(base().shrink(delta), z0_ + delta, z1_ - delta);
  }
  throw std::logic_error("Domain::shrink: unknown shape");
}

Vec2 Domain::closest_boundary_point(Vec2 x) const {
  switch (shape_) {
    case Shape::ball: {
      const Vec2 d = x - center_;
      const Vec2 dir = norm2(d) == 0.0 ? Vec2{1.0, 0.0} : normalized(d);
      return center_ + outer_r_ * dir;
    }
    case Shape::rectangle: {
      // Nearest face of an interior point.
      const double gaps[4] = {x.x - lo_.x, hi_.x - x.x, x.y - lo_.y, hi_.y - x.y};
      const int face = int(std::min_element(gaps, gaps + 4) - gaps);
      Vec2 p = x;
      if (face == 0) p.x = lo_.x;
      if (face == 1) p.x = hi_.x;
      if (face == 2) p.y = lo_.y;
      if (face == 3) p.y = hi_.y;
      p.x = clampd(p.x, lo_.x, hi_.x);
      p.y = clampd(p.y, lo_.y, hi_.y);
      return p;
    }
    case Shape::annulus: {
      const Vec2 d = x - center_;
      const double r = norm(d);
      const Vec2 dir = r == 0.0 ? Vec2{1.0, 0.0} : Vec2{d.x / r, d.y / r};
      return (r - inner_r_ <= outer_r_ - r) ? center_ + inner_r_ * dir : center_ + outer_r_ * dir;
    }
    case Shape::product:
      throw std::logic_error("closest_boundary_point: 2-D domains only");
  }
  throw std::logic_error("closest_boundary_point: unknown shape");
}

Domain parse_domain_spec(const std::string& spec) {
  const auto parts = csv::split(spec, ':');
  if (parts.size() != 2) throw std::invalid_argument("bad domain spec: " + spec);
  const auto args = csv::split(parts[1], ',');
  auto num = [&args](std::size_t i) { return std::stod(args[i]); };
  if (parts[0] == "ball" && args.size() == 1) return Domain::ball({0.0, 0.0}, num(0));
  if (parts[0] == "rect" && args.size() == 2)
    return Domain::rectangle({0.0, 0.0}, {num(0), num(1)});
  if (parts[0] == "rect" && args.size() == 4)
    return Domain::rectangle({num(0), num(1)}, {num(2), num(3)});
  if (parts[0] == "annulus" && args.size() == 2)
    return Domain::annulus({0.0, 0.0}, num(0), num(1));
  if (parts[0] == "cyl" && args.size() == 2)
    return Domain::product(Domain::ball({0.0, 0.0}, num(0)), 0.0, num(1));
  throw std::invalid_argument("bad domain spec: " + spec +
                              " (expected ball:R | rect:lx,ly | rect:x0,y0,x1,y1 | annulus:r,R | cyl:R,h)");
}

Field::Field(Rule rule) : rule_(std::move(rule)) {
  if (const auto* mv = std::get_if<MultiVortex>(&rule_)) {
    for (const auto& atom : mv->atoms)
      if (atom.degree == 0) throw std::invalid_argument("vortex atom with degree 0");
    phase_factor_ = {std::cos(mv->phase), std::sin(mv->phase)};
    unit_ = true;
  } else if (const auto* c = std::get_if<ConstantField>(&rule_)) {
    unit_ = std::abs(norm(c->value) - 1.0) < 1e-12;
  } else if (std::holds_alternative<LinearField>(rule_)) {
    unit_ = false;
  } else if (const auto* s = std::get_if<SampledField>(&rule_)) {
    if (s->nx < 2 || s->ny < 2 || s->values.size() != std::size_t(s->nx) * std::size_t(s->ny))
      throw std::invalid_argument("SampledField: inconsistent grid");
    unit_ = s->renormalize;
  }
}

Vec2 Field::operator()(Vec2 x) const {
  return std::visit(
      [&](const auto& rule) -> Vec2 {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, MultiVortex>) {
          return eval_vortex(rule, phase_factor_, x);
        } else if constexpr (std::is_same_v<T, ConstantField>) {
          return rule.value;
        } else if constexpr (std::is_same_v<T, LinearField>) {
          return {rule.a11 * x.x + rule.a12 * x.y, rule.a21 * x.x + rule.a22 * x.y};
        } else {
          const auto& s = rule;
          const double gx = clampd((x.x - s.origin.x) / s.spacing, 0.0, double(s.nx - 1));
          const double gy = clampd((x.y - s.origin.y) / s.spacing, 0.0, double(s.ny - 1));
          const int i = std::min(int(gx), s.nx - 2);
          const int j = std::min(int(gy), s.ny - 2);
          const double fx = gx - i, fy = gy - j;
          const Vec2 v00 = s.values[std::size_t(j) * s.nx + i];
          const Vec2 v10 = s.values[std::size_t(j) * s.nx + i + 1];
          const Vec2 v01 = s.values[std::size_t(j + 1) * s.nx + i];
          const Vec2 v11 = s.values[std::size_t(j + 1) * s.nx + i + 1];
          Vec2 v = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 +
                   fx * fy * v11;
          if (s.renormalize) {
            const double n = norm(v);
            if (n > 0.0) v = (1.0 / n) * v;
          }
          return v;
        }
      },
      rule_);
}

std::vector<Vec2> Field::singular_points() const {
  std::vector<Vec2> pts;
  if (const auto* mv = std::get_if<MultiVortex>(&rule_))
    for (const auto& atom : mv->atoms) pts.push_back(atom.position);
  return pts;
}

int Field::degree_inside(const Domain& dom) const {
  int total = 0;
  if (const auto* mv = std::get_if<MultiVortex>(&rule_))
    for (const auto& atom : mv->atoms)
      if (dom.contains(atom.position)) total += atom.degree;
  return total;
}

Field make_vortex_field(std::vector<VortexAtom> atoms, double phase) {
  return Field(MultiVortex{std::move(atoms), phase});
}

Field make_constant_field(Vec2 value) { return Field(ConstantField{value}); }

Field make_linear_field(double a11, double a12, double a21, double a22) {
  return Field(LinearField{a11, a12, a21, a22});
}

Field make_sampled_field(SampledField data) { return Field(std::move(data)); }

Field sampled_field_from_csv(const std::string& path) {
  const auto tab = csv::read_file(path);
  const int cx = tab.column("x"), cy = tab.column("y");
  const int cux = tab.column("ux"), cuy = tab.column("uy");
  if (cx < 0 || cy < 0 || cux < 0 || cuy < 0)
    throw std::runtime_error("sampled field CSV needs header x,y,ux,uy: " + path);
  std::vector<double> xs, ys;
  for (const auto& row : tab.rows) {
    xs.push_back(row[cx]);
    ys.push_back(row[cy]);
  }
  auto uniq = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto ux = uniq(xs), uy = uniq(ys);
  if (ux.size() < 2 || uy.size() < 2 || ux.size() * uy.size() != tab.rows.size())
    throw std::runtime_error("sampled field CSV is not a full rectangular grid: " + path);
  SampledField s;
  s.origin = {ux.front(), uy.front()};
  s.spacing = ux[1] - ux[0];
  s.nx = int(ux.size());
  s.ny = int(uy.size());
  s.values.assign(std::size_t(s.nx) * s.ny, Vec2{});
  bool all_unit = true;
  for (const auto& row : tab.rows) {
    const int i = int(std::lround((row[cx] - s.origin.x) / s.spacing));
    const int j = int(std::lround((row[cy] - s.origin.y) / s.spacing));
    const Vec2 v{row[cux], row[cuy]};
    s.values[std::size_t(j) * s.nx + i] = v;
    all_unit = all_unit && std::abs(norm(v) - 1.0) < 1e-9;
  }
  s.renormalize = all_unit;
  return make_sampled_field(std::move(s));
}

Field parse_field_spec(const std::string& spec) {
  const auto parts = csv::split(spec, ':');
  if (parts.size() != 2) throw std::invalid_argument("bad field spec: " + spec);
  const std::string& kind = parts[0];
  if (kind == "vortex") {
    std::vector<VortexAtom> atoms;
    for (const auto& group : csv::split(parts[1], ';')) {
      const auto nums = csv::split(group, ',');
      if (nums.size() != 3) throw std::invalid_argument("bad vortex atom: " + group);
      atoms.push_back({{std::stod(nums[0]), std::stod(nums[1])}, std::stoi(nums[2])});
    }
    return make_vortex_field(std::move(atoms));
  }
  const auto nums = csv::split(parts[1], ',');
  if (kind == "const" && nums.size() == 2)
    return make_constant_field({std::stod(nums[0]), std::stod(nums[1])});
  if (kind == "linear" && nums.size() == 4)
    return make_linear_field(std::stod(nums[0]), std::stod(nums[1]), std::stod(nums[2]),
                             std::stod(nums[3]));
  if (kind == "sampled" && nums.size() == 1) return sampled_field_from_csv(nums[0]);
  throw std::invalid_argument(
      "bad field spec: " + spec +
      " (expected vortex:x,y,deg[;...] | const:ux,uy | linear:a11,a12,a21,a22 | sampled:path.csv)");
}

}  // namespace vortexlab
