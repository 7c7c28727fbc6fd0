#pragma once

#include <optional>
#include <vector>

#include "vortexlab/fields.hpp"
#include "vortexlab/kernels.hpp"

namespace vortexlab {

/// Scaling in front of the double integral. The vortex scaling divides by
/// eps^{d+2} |log eps|, the plain nonlocal (BBM) scaling by eps^{d+2}.
enum class Scaling { vortex, bbm };

/// Quadrature resolution for the kernel variable xi on the ball of radius
/// T: radial x angular in d=2, radial x axial x angular in d=3.
struct XiGridSpec {
  int radial = 64;
  int angular = 64;
  int axial = 16;
};

struct EnergySpec {
  Kernel kernel;
  Domain domain;
  double eps = 0.1;
  Scaling scaling = Scaling::vortex;
  /// Midpoint-grid step for the x integral; <= 0 selects the default eps/8.
  double grid_h = 0.0;
  /// Optional localization window V; energies integrate over V x V.
  std::optional<Domain> localization;
  XiGridSpec xi;

  double step() const { return grid_h > 0.0 ? grid_h : eps / 8.0; }
  const Domain& window() const { return localization ? *localization : domain; }
};

struct EnergyResult {
  double value = 0.0;
  std::size_t grid_nodes = 0;
};

/// Nonlocal energy of f under the given spec, computed in the xi-form:
/// for each xi node, sum w_x |u(x + eps xi) - u(x)|^2 over midpoint-grid
/// nodes x with both endpoints in the window. Deterministic for a fixed
/// spec: per-xi partial sums are combined by a fixed pairwise tree, so the
/// result is bit-identical for any thread count.
EnergyResult energy_detailed(const EnergySpec& spec, const Field& f);
double energy(const EnergySpec& spec, const Field& f);

/// The same functional by the direct (x, y) double sum over ordered pairs
/// with |x - y| <= eps T, using spatial binning. Independent of the
/// xi-form path; feasible up to 1e5 grid nodes.
double energy_pairwise_oracle(const EnergySpec& spec, const Field& f);

/// r_eps = factor * eps * log|log eps|.
struct CutoffRule {
  double factor = 1.0;
  double operator()(double eps) const { return factor * eps * std::log(std::abs(std::log(eps))); }
};

struct UpperBoundRow {
  double eps;
  double f_eps;
  double r_eps;
  double ratio_to_limit;  // F_eps / (C_rho * ||M||)
  double log_ratio;       // |log r_eps| / |log eps|
};

/// Vortex-scaling sweep of the single-vortex field on a ball (d=2) or on a
/// product domain around its axis (d=3), against the limit C_rho * ||M||.
std::vector<UpperBoundRow> upper_bound_report(const Kernel& k, const Domain& dom,
                                              const std::vector<double>& eps_list,
                                              CutoffRule cutoff = {}, double grid_h = 0.0,
                                              XiGridSpec xi = {});

}  // namespace vortexlab
