#include "vortexlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vortexlab/csv.hpp"

namespace vortexlab {

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  if (depth <= 0)
    throw std::runtime_error("second_moment: radial quadrature did not converge (profile not integrable?)");
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (std::abs(left + right - whole) <= tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& quad) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson(a, b, fa, fm, fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, quad.abs_tol, quad.max_depth);
}

}  // namespace

Kernel::Kernel(std::string name, std::function<double(double)> profile, double support_radius,
               double lower_bound_value, double lower_bound_radius, std::vector<double> breakpoints)
    : name_(std::move(name)),
      profile_(std::move(profile)),
      support_radius_(support_radius),
      rho0_(lower_bound_value),
      r0_(lower_bound_radius),
      breakpoints_(std::move(breakpoints)) {
  if (support_radius_ < 0.0) throw std::invalid_argument("Kernel: negative support radius");
  if (breakpoints_.empty()) breakpoints_ = {0.0, support_radius_};
}

double Kernel::evaluate(double t) const {
  if (t < 0.0) throw std::invalid_argument("Kernel::evaluate: negative argument");
  if (t > support_radius_) return 0.0;
  return profile_(t);
}

bool Kernel::is_normalized(int d) const { return rho0_ > 0.0 && r0_ >= std::sqrt(double(d)); }

double Kernel::normalization_scale(int d) const {
  if (rho0_ <= 0.0 || r0_ <= 0.0)
    throw std::domain_error("Kernel: no positive lower bound near 0");
  return r0_ / std::sqrt(double(d));
}

Kernel indicator_kernel(double support_radius) {
  return Kernel("indicator", [](double) { return 1.0; }, support_radius, 1.0, support_radius);
}

Kernel triangle_kernel(double support_radius) {
  const double T = support_radius;
  return Kernel(
      "triangle", [T](double t) { return std::max(1.0 - t / T, 0.0); }, T, 0.5, 0.5 * T);
}

Kernel gaussian_kernel(double sigma, double support_radius) {
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  const double s2 = 2.0 * sigma * sigma;
  // Lower-bound plateau: rho >= exp(-1/2) on [0, sigma].
  return Kernel(
      "gauss", [s2](double t) { return std::exp(-t * t / s2); }, support_radius,
      std::exp(-0.5), std::min(sigma, support_radius));
}

Kernel table_kernel(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 2) throw std::invalid_argument("table_kernel: need at least two samples");
  std::sort(samples.begin(), samples.end());
  if (samples.front().first != 0.0)
    samples.insert(samples.begin(), {0.0, samples.front().second});
  std::vector<double> breaks;
  breaks.reserve(samples.size());
  for (auto& [t, rho] : samples) {
    if (rho < 0.0) throw std::invalid_argument("table_kernel: negative profile value");
    breaks.push_back(t);
  }
  const double T = samples.back().first;
  double rho0 = samples[0].second;
  double r0 = 0.0;
  for (std::size_t i = 1; i < samples.size() && samples[i - 1].second > 0.0; ++i) {
    rho0 = std::min(rho0, samples[i].second);
    r0 = samples[i].first;
    if (samples[i].second == 0.0) break;
  }
  auto profile = [samples](double t) {
    auto it = std::upper_bound(samples.begin(), samples.end(), std::make_pair(t, 1e300));
    if (it == samples.begin()) return samples.front().second;
    if (it == samples.end()) return samples.back().second;
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    if (t1 == t0) return v1;
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * v0 + w * v1;
  };
  return Kernel("table", std::move(profile), T, rho0, r0, std::move(breaks));
}

Kernel table_kernel_from_csv(const std::string& path) {
  const auto tab = csv::read_file(path);
  const int ct = tab.column("t");
  const int cr = tab.column("rho");
  if (ct < 0 || cr < 0) throw std::runtime_error("table kernel CSV needs header t,rho: " + path);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(tab.rows.size());
  for (const auto& row : tab.rows) samples.emplace_back(row[ct], row[cr]);
  return table_kernel(std::move(samples));
}

double second_moment(const Kernel& k, int d, const QuadratureSpec& quad) {
  if (d != 2 && d != 3) throw std::invalid_argument("second_moment: d must be 2 or 3");
  const double surface = (d == 2) ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
  auto integrand = [&k, d](double r) { return k.evaluate(r) * std::pow(r, d + 1); };
  // Integrate between breakpoints so profile kinks never straddle a panel.
  double radial = 0.0;
  const auto& breaks = k.breakpoints();
  double prev = 0.0;
  for (double b : breaks) {
    if (b > prev) {
      radial += integrate(integrand, prev, b, quad);
      prev = b;
    }
  }
  if (k.support_radius() > prev) radial += integrate(integrand, prev, k.support_radius(), quad);
  return surface * radial;
}

double gamma_limit_constant(const Kernel& k, int d, const QuadratureSpec& quad) {
  return 2.0 * std::numbers::pi / double(d) * second_moment(k, d, quad);
}

Kernel parse_kernel_spec(const std::string& spec) {
  const auto parts = csv::split(spec, ':');
  if (parts.empty()) throw std::invalid_argument("empty kernel spec");
  const std::string& kind = parts[0];
  if (kind == "indicator" && parts.size() == 2) return indicator_kernel(std::stod(parts[1]));
  if (kind == "triangle" && parts.size() == 2) return triangle_kernel(std::stod(parts[1]));
  if (kind == "gauss" && parts.size() == 3)
    return gaussian_kernel(std::stod(parts[1]), std::stod(parts[2]));
  if (kind == "table" && parts.size() == 2) return table_kernel_from_csv(parts[1]);
  throw std::invalid_argument("bad kernel spec: " + spec +
                              " (expected indicator:T | triangle:T | gauss:sigma:T | table:path.csv)");
}

}  // namespace vortexlab
