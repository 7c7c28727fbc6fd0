#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace vortexlab {

/// Tolerances for the adaptive radial quadrature.
struct QuadratureSpec {
  double abs_tol = 1e-8;
  int max_depth = 48;
};

/// Radial interaction kernel rho with compact support [0, T].
///
/// A kernel is admissible when rho >= 0, rho vanishes beyond T, the second
/// moment over R^d is finite, and rho >= rho0 > 0 on [0, r0] for some
/// r0 > 0. The lower-bound pair (rho0, r0) is stored explicitly so the
/// normalization query below can report it.
class Kernel {
 public:
  Kernel(std::string name, std::function<double(double)> profile, double support_radius,
         double lower_bound_value, double lower_bound_radius,
         std::vector<double> breakpoints = {});

  /// rho(t); exactly zero for t > T. Negative t is a contract violation.
  double evaluate(double t) const;

  double support_radius() const { return support_radius_; }
  double lower_bound_value() const { return rho0_; }
  double lower_bound_radius() const { return r0_; }
  const std::string& name() const { return name_; }

  /// Whether rho dominates rho0 * chi_{[-1,1]^d} radially, i.e. the lower
  /// bound extends to radius sqrt(d). Kernels are never rescaled; callers
  /// that need the normalized form can divide lengths by the reported
  /// normalization_scale.
  bool is_normalized(int d) const;

  /// Scale s such that t -> rho(s t) has its lower-bound plateau reaching
  /// sqrt(d). Returns r0 / sqrt(d).
  double normalization_scale(int d) const;

  /// Quadrature breakpoints: profile is smooth between consecutive entries.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  std::string name_;
  std::function<double(double)> profile_;
  double support_radius_;
  double rho0_;
  double r0_;
  std::vector<double> breakpoints_;
};

/// Built-in catalog.
Kernel indicator_kernel(double support_radius = 1.0);
Kernel triangle_kernel(double support_radius = 1.0);
Kernel gaussian_kernel(double sigma, double support_radius);
/// Piecewise-linear kernel through (t, rho) samples; support ends at the
/// last sample point.
Kernel table_kernel(std::vector<std::pair<double, double>> samples);
/// Loads a two-column CSV with header "t,rho".
Kernel table_kernel_from_csv(const std::string& path);

/// int_{R^d} rho(|xi|) |xi|^2 dxi, evaluated as the 1-D radial integral
/// int_0^T rho(r) r^{d+1} dr times the surface measure of S^{d-1}.
double second_moment(const Kernel& k, int d, const QuadratureSpec& quad = {});

/// C_rho = (2 pi / d) * second_moment(k, d).
double gamma_limit_constant(const Kernel& k, int d, const QuadratureSpec& quad = {});

/// Parses "indicator:T", "triangle:T", "gauss:sigma:T" or "table:path.csv".
Kernel parse_kernel_spec(const std::string& spec);

}  // namespace vortexlab
