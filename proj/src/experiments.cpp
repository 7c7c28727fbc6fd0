#include "vortexlab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vortexlab/csv.hpp"

namespace vortexlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kVersion = "0.1.0";

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : csv::split(s, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

}  // namespace

RunConfig default_config(const std::string& experiment) {
  RunConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "E1") {
    cfg.domain = "rect:1,1";
    cfg.field = "linear:1,0,0,1";
    cfg.eps_list = {0.1, 0.05};
    cfg.grid_div = 16;
  } else if (experiment == "E2") {
    cfg.domain = "ball:1";
    cfg.field = "vortex:0,0,1";
    cfg.eps_list = {0.02, 0.01, 0.005, 0.0025};
    cfg.grid_div = 4;
    cfg.xi_radial = 32;
    cfg.xi_angular = 32;
  } else if (experiment == "E3") {
    cfg.domain = "ball:1";
    cfg.field = "vortex:0,0,1";
    cfg.eps_list = {1.0 / 512, 1.0 / 1024, 1.0 / 2048};
  } else if (experiment == "E4") {
    cfg.domain = "rect:-1,-1,1,1";
    cfg.field = "vortex:-0.2,0,1;0.2,0,-1";
    cfg.eps_list = {1.0 / 128};
    cfg.deltas = {0.1, 0.2};
  } else if (experiment == "E5") {
    cfg.domain = "ball:1";
    cfg.trials = 200;
  } else if (experiment == "E6") {
    cfg.domain = "ball:1";
    cfg.field = "vortex:0,0,1";
    cfg.eps_list = {1.0 / 128};
    cfg.angle_deg = 30.0;
    cfg.deltas = {0.1};
  } else if (experiment == "E7") {
    cfg.domain = "cyl:1,1";
    cfg.field = "vortex:0,0,1";
    cfg.eps_list = {0.02, 0.01};
    cfg.grid_div = 4;
    cfg.xi_radial = 12;
    cfg.xi_angular = 16;
    cfg.xi_axial = 8;
    cfg.reduced = true;
  } else {
    throw std::invalid_argument("unknown experiment: " + experiment);
  }
  return cfg;
}

std::vector<RunConfig> parse_config_text(const std::string& text) {
  std::vector<RunConfig> out;
  std::istringstream in(text);
  std::string line;
  RunConfig* cur = nullptr;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      out.push_back(default_config(trim(line.substr(1, line.size() - 2))));
      cur = &out.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || cur == nullptr)
      throw std::runtime_error("config: bad line '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "kernel") cur->kernel = val;
    else if (key == "domain") cur->domain = val;
    else if (key == "field") cur->field = val;
    else if (key == "eps") cur->eps_list = parse_list(val);
    else if (key == "grid_div") cur->grid_div = std::stoi(val);
    else if (key == "xi_radial") cur->xi_radial = std::stoi(val);
    else if (key == "xi_angular") cur->xi_angular = std::stoi(val);
    else if (key == "xi_axial") cur->xi_axial = std::stoi(val);
    else if (key == "deltas") cur->deltas = parse_list(val);
    else if (key == "angle_deg") cur->angle_deg = std::stod(val);
    else if (key == "trials") cur->trials = std::stoi(val);
    else if (key == "seed") cur->seed = unsigned(std::stoul(val));
    else if (key == "reduced") cur->reduced = val == "1" || val == "true";
    else if (key == "out") cur->out_dir = val;
    else throw std::runtime_error("config: unknown key '" + key + "'");
  }
  return out;
}

std::vector<RunConfig> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const std::vector<RunConfig>& cfgs) {
  std::ostringstream out;
  for (const auto& c : cfgs) {
    out << '[' << c.experiment << "]\n";
    out << "kernel = " << c.kernel << '\n';
    out << "domain = " << c.domain << '\n';
    out << "field = " << c.field << '\n';
    out << "eps = " << join_list(c.eps_list) << '\n';
    out << "grid_div = " << c.grid_div << '\n';
    out << "xi_radial = " << c.xi_radial << '\n';
    out << "xi_angular = " << c.xi_angular << '\n';
    out << "xi_axial = " << c.xi_axial << '\n';
    out << "deltas = " << join_list(c.deltas) << '\n';
    out << "angle_deg = " << fmt(c.angle_deg) << '\n';
    out << "trials = " << c.trials << '\n';
    out << "seed = " << c.seed << '\n';
    out << "reduced = " << (c.reduced ? 1 : 0) << '\n';
    out << "out = " << c.out_dir << '\n';
  }
  return out.str();
}

namespace {

void check_feasible(const RunConfig& cfg, const Domain& dom, double eps) {
  const auto bb = dom.bounding_box();
  const double h = eps / cfg.grid_div;
  double nodes = (bb.hi.x - bb.lo.x) / h * (bb.hi.y - bb.lo.y) / h;
  if (dom.dimension() == 3) nodes *= (bb.hi.z - bb.lo.z) / h;
  const double xi_nodes = double(cfg.xi_radial) * cfg.xi_angular *
                          (dom.dimension() == 3 ? cfg.xi_axial : 1);
  const double pair_ops = (dom.dimension() == 3 ? nodes / ((bb.hi.z - bb.lo.z) / h) : nodes) *
                          xi_nodes;
  if (nodes > 6e7 || pair_ops > 4e11) {
    std::ostringstream msg;
    msg << "experiment " << cfg.experiment << " infeasible at eps=" << eps << ": ~"
        << std::llround(nodes) << " grid nodes (~" << std::llround(nodes * 17.0 / 1.0e6)
        << " MB), ~" << pair_ops << " pair operations; refine grid_div or the xi grid";
    throw std::invalid_argument(msg.str());
  }
}

/// |Omega ∩ (Omega - s)| for the catalog 2-D shapes.
double overlap_area(const Domain& dom, Vec2 s) {
  switch (dom.shape()) {
    case Domain::Shape::rectangle: {
      const double lx = dom.rect_hi().x - dom.rect_lo().x;
      const double ly = dom.rect_hi().y - dom.rect_lo().y;
      return std::max(0.0, lx - std::abs(s.x)) * std::max(0.0, ly - std::abs(s.y));
    }
    case Domain::Shape::ball: {
      const double R = dom.outer_radius();
      const double d = norm(s);
      if (d >= 2.0 * R) return 0.0;
      return 2.0 * R * R * std::acos(d / (2.0 * R)) - 0.5 * d * std::sqrt(4.0 * R * R - d * d);
    }
    default:
      throw std::invalid_argument("overlap_area: rectangle or ball only");
  }
}

/// High-resolution reference for the linear-field nonlocal energy:
/// int rho(|xi|) |A xi|^2 |Omega ∩ (Omega - eps xi)| dxi by dense polar
/// quadrature (independent of the energy() path).
double linear_bbm_reference(const Kernel& k, const Domain& dom, const LinearField& lin,
                            double eps) {
  const int nr = 512, nth = 512;
  const double T = k.support_radius();
  const double dr = T / nr;
  const double dth = 2.0 * kPi / nth;
  double acc = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * dr;
    const double rho = k.evaluate(r);
    if (rho == 0.0) continue;
    double ring = 0.0;
    for (int j = 0; j < nth; ++j) {
      const double th = (j + 0.5) * dth;
      const Vec2 xi{r * std::cos(th), r * std::sin(th)};
      const Vec2 axi{lin.a11 * xi.x + lin.a12 * xi.y, lin.a21 * xi.x + lin.a22 * xi.y};
      ring += norm2(axi) * overlap_area(dom, eps * xi);
    }
    acc += rho * r * dr * dth * ring;
  }
  return acc;
}

SweepReport run_e1(const RunConfig& cfg) {
  SweepReport rep;
  rep.criterion = "|value/reference - 1| <= 1e-3 per row (nonlocal energy of a linear field)";
  const Kernel k = parse_kernel_spec(cfg.kernel);
  const Domain dom = parse_domain_spec(cfg.domain);
  const Field f = parse_field_spec(cfg.field);
  const auto* lin = std::get_if<LinearField>(&f.rule());
  if (!lin) throw std::invalid_argument("E1 needs a linear field");
  for (double eps : cfg.eps_list) {
    check_feasible(cfg, dom, eps);
    const double t0 = now_ms();
    EnergySpec spec{k, dom, eps, Scaling::bbm, eps / cfg.grid_div, {},
                    {cfg.xi_radial, cfg.xi_angular, cfg.xi_axial}};
    const double value = energy(spec, f);
    const double reference = linear_bbm_reference(k, dom, *lin, eps);
    const double ratio = value / reference;
    rep.rows.push_back({eps, value, reference, ratio, now_ms() - t0});
    if (std::abs(ratio - 1.0) > criteria::kBbmRelTol) rep.passed = false;
  }
  return rep;
}

SweepReport run_e2(const RunConfig& cfg) {
  SweepReport rep;
  rep.criterion =
      "core-excluded F_eps / C_rho in [0.7, 1.1]; ratio over the predicted log-rate "
      "|log r_eps|/|log eps| nondecreasing as eps decreases";
  const Kernel k = parse_kernel_spec(cfg.kernel);
  const Domain dom = parse_domain_spec(cfg.domain);
  // The raw ratio tracks the predicted log-rate, which is not monotone on
  // desk-scale eps (its minimum sits near eps ~ 3e-3), so the trend is
  // asserted on the rate-normalized ratio.
  double prev_normalized = -1.0;
  for (double eps : cfg.eps_list) {
    check_feasible(cfg, dom, eps);
    const double t0 = now_ms();
    const auto rows = upper_bound_report(k, dom, {eps}, {}, eps / cfg.grid_div,
                                         {cfg.xi_radial, cfg.xi_angular, cfg.xi_axial});
    const auto& r = rows.front();
    rep.rows.push_back({eps, r.f_eps, r.f_eps / r.ratio_to_limit, r.ratio_to_limit,
                        now_ms() - t0});
    if (r.ratio_to_limit < criteria::kVortexRatioLo || r.ratio_to_limit > criteria::kVortexRatioHi)
      rep.passed = false;
    const double normalized = r.ratio_to_limit / r.log_ratio;
    if (prev_normalized >= 0.0 && normalized < prev_normalized - 1e-12) rep.passed = false;
    prev_normalized = normalized;
  }
  return rep;
}

SweepReport run_e3(const RunConfig& cfg) {
  SweepReport rep;
  rep.criterion = "X_eps / (4 pi ||M||) in [0.8, 1.2], approaching 1 monotonically";
  const Domain dom = parse_domain_spec(cfg.domain);
  const Field f = parse_field_spec(cfg.field);
  double mass = 0.0;
  if (const auto* mv = std::get_if<MultiVortex>(&f.rule()))
    for (const auto& a : mv->atoms)
      if (dom.contains(a.position)) mass += std::abs(a.degree);
  const double reference = 4.0 * kPi * mass;
  double prev_gap = 1e300;
  for (double eps : cfg.eps_list) {
    const double t0 = now_ms();
    const LatticeField lf = sample(f, dom, eps);
    const double value = xy_energy(lf, dom);
    const double ratio = value / reference;
    rep.rows.push_back({eps, value, reference, ratio, now_ms() - t0});
    if (ratio < criteria::kXyRatioLo || ratio > criteria::kXyRatioHi) rep.passed = false;
    const double gap = std::abs(1.0 - ratio);
    if (gap > prev_gap + 1e-12) rep.passed = false;
    prev_gap = gap;
  }
  return rep;
}

SweepReport run_e4(const RunConfig& cfg) {
  SweepReport rep;
  rep.criterion = "dipole detection: two atoms +1/-1; flat distance <= 10 eps pi per margin";
  const Domain dom = parse_domain_spec(cfg.domain);
  const Field f = parse_field_spec(cfg.field);
  const auto* mv = std::get_if<MultiVortex>(&f.rule());
  if (!mv) throw std::invalid_argument("E4 needs a vortex field");
  AtomicCurrent target;
  target.atoms = mv->atoms;

  std::vector<std::pair<double, Field>> seq;
  for (double eps : cfg.eps_list) seq.emplace_back(eps, f);
  const double t0 = now_ms();
  const auto report = convergence_check(seq, target, dom, cfg.deltas);
  const double elapsed = now_ms() - t0;

  for (double eps : cfg.eps_list) {
    // Detection count check at this eps.
    const auto ex = extract_vortices(jacobian_measure(discretize(f, dom, eps)), dom);
    bool atoms_ok = ex.current.atoms.size() == mv->atoms.size() && ex.all_quantized;
    double worst = 0.0;
    for (const auto& row : report.rows)
      if (row.eps == eps) {
        worst = std::max(worst, row.distance);
        atoms_ok = atoms_ok && row.quantized;
      }
    const double bound = criteria::kFlatFactor * eps * kPi;
    rep.rows.push_back({eps, worst, bound, worst / bound, elapsed});
    if (!atoms_ok || worst > bound) rep.passed = false;
  }
  return rep;
}

SweepReport run_e5(const RunConfig& cfg) {
  SweepReport rep;
  rep.criterion = "matching equals exhaustive enumeration (<= 1e-9) on random charge sets";
  const Domain ball = Domain::ball({0.0, 0.0}, 1.0);
  const Domain rect = Domain::rectangle({-1.0, -0.5}, {1.0, 0.5});
  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  rep.seed = cfg.seed;
  for (int t = 0; t < cfg.trials; ++t) {
    const Domain& U = (t % 2 == 0) ? ball : rect;
    const int units = 1 + int(unif(rng) * 4.0);  // 1..4 unit charges
    AtomicCurrent a, b;
    for (int q = 0; q < units; ++q) {
      Vec2 p;
      do {
        p = {2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0};
      } while (!U.contains(p) || U.boundary_distance(p) < 1e-3);
      const int degree = unif(rng) < 0.5 ? 1 : -1;
      if (unif(rng) < 0.5)
        a.atoms.push_back({p, degree});
      else
        b.atoms.push_back({p, degree});
    }
    const double t0 = now_ms();
    const double solver = flat_norm(a, b, U).value;
    const double reference = flat_norm_by_enumeration(a, b, U);
    rep.rows.push_back({double(t), solver, reference, solver - reference, now_ms() - t0});
    if (std::abs(solver - reference) > criteria::kMatchTol) rep.passed = false;
  }
  return rep;
}

SweepReport run_e6(const RunConfig& cfg) {
  SweepReport rep;
  rep.criterion = "axis-aligned vs rotated extraction: flat distance <= 10 eps pi";
  const Domain dom = parse_domain_spec(cfg.domain);
  const Field f = parse_field_spec(cfg.field);
  const double theta = cfg.angle_deg * kPi / 180.0;
  const Vec2 xi{std::cos(theta), std::sin(theta)};
  for (double eps : cfg.eps_list) {
    const double t0 = now_ms();
    const auto ex_axis = extract_vortices(jacobian_measure(discretize(f, dom, eps)), dom);
    const auto ex_rot =
        extract_vortices(jacobian_measure(discretize_rotated(f, dom, eps, xi)), dom);
    const Domain U = dom.shrink(cfg.deltas.empty() ? 0.1 : cfg.deltas.front());
    const double value = flat_norm(ex_axis.current.restricted_to(U),
                                   ex_rot.current.restricted_to(U), U)
                             .value;
    const double bound = criteria::kFlatFactor * eps * kPi;
    rep.rows.push_back({eps, value, bound, value / bound, now_ms() - t0});
    if (value > bound || !ex_axis.all_quantized || !ex_rot.all_quantized) rep.passed = false;
  }
  return rep;
}

SweepReport run_e7(const RunConfig& cfg) {
  SweepReport rep;
  const double lo = cfg.reduced ? criteria::kProductRatioLoReduced : criteria::kProductRatioLo;
  const double hi = cfg.reduced ? criteria::kProductRatioHiReduced : criteria::kProductRatioHi;
  {
    std::ostringstream c;
    c << "core-excluded product-vortex F_eps / (C_rho ||M||) in [" << lo << ", " << hi
      << "]; rate-normalized ratio increasing";
    rep.criterion = c.str();
  }
  const Kernel k = parse_kernel_spec(cfg.kernel);
  const Domain dom = parse_domain_spec(cfg.domain);
  double prev_normalized = -1.0;
  for (double eps : cfg.eps_list) {
    check_feasible(cfg, dom, eps);
    const double t0 = now_ms();
    const auto rows = upper_bound_report(k, dom, {eps}, {}, eps / cfg.grid_div,
                                         {cfg.xi_radial, cfg.xi_angular, cfg.xi_axial});
    const auto& r = rows.front();
    rep.rows.push_back({eps, r.f_eps, r.f_eps / r.ratio_to_limit, r.ratio_to_limit,
                        now_ms() - t0});
    if (r.ratio_to_limit < lo || r.ratio_to_limit > hi) rep.passed = false;
    const double normalized = r.ratio_to_limit / r.log_ratio;
    if (prev_normalized >= 0.0 && normalized < prev_normalized - 1e-12) rep.passed = false;
    prev_normalized = normalized;
  }
  return rep;
}

}  // namespace

double flat_norm_by_enumeration(const AtomicCurrent& a, const AtomicCurrent& b, const Domain& U) {
  std::vector<Vec2> pos, neg;
  auto expand = [&](const AtomicCurrent& c, int sign) {
    for (const auto& atom : c.atoms) {
      const int d = sign * atom.degree;
      for (int q = 0; q < std::abs(d); ++q) (d > 0 ? pos : neg).push_back(atom.position);
    }
  };
  expand(a, +1);
  expand(b, -1);

  std::vector<char> used(neg.size(), 0);
  // Assign positives in order: boundary or any unused negative; leftover
  // negatives route to the boundary.
  std::function<double(std::size_t)> best = [&](std::size_t i) -> double {
    if (i == pos.size()) {
      double rest = 0.0;
      for (std::size_t j = 0; j < neg.size(); ++j)
        if (!used[j]) rest += U.boundary_distance(neg[j]);
      return rest;
    }
    double best_cost = U.boundary_distance(pos[i]) + best(i + 1);
    for (std::size_t j = 0; j < neg.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      best_cost = std::min(best_cost, path_distance(U, pos[i], neg[j]) + best(i + 1));
      used[j] = 0;
    }
    return best_cost;
  };
  return kPi * best(0);
}

SweepReport run_experiment(const RunConfig& cfg) {
  SweepReport rep;
  if (cfg.experiment == "E1") rep = run_e1(cfg);
  else if (cfg.experiment == "E2") rep = run_e2(cfg);
  else if (cfg.experiment == "E3") rep = run_e3(cfg);
  else if (cfg.experiment == "E4") rep = run_e4(cfg);
  else if (cfg.experiment == "E5") rep = run_e5(cfg);
  else if (cfg.experiment == "E6") rep = run_e6(cfg);
  else if (cfg.experiment == "E7") rep = run_e7(cfg);
  else throw std::invalid_argument("unknown experiment: " + cfg.experiment);

  rep.experiment = cfg.experiment;
  rep.version = kVersion;
  rep.config_hash = fnv1a(serialize_config({cfg}));
  if (rep.seed == 0) rep.seed = cfg.seed;

  std::filesystem::create_directories(cfg.out_dir);
  emit_table(rep, cfg.out_dir + "/report.csv");
  emit_plot_script(rep, "report.csv", cfg.out_dir + "/report.gp");
  return rep;
}

void emit_table(const SweepReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_table: cannot open " + path);
  out << "eps,value,reference,ratio,wall_ms\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%lld\n", r.eps, r.value, r.reference,
                  r.ratio, std::llround(r.wall_ms));
    out << buf;
  }
}

void emit_plot_script(const SweepReport& report, const std::string& csv_name,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_plot_script: cannot open " + path);
  out << "# " << report.experiment << ": " << report.criterion << '\n';
  out << "# config_hash=" << report.config_hash << " seed=" << report.seed << " version="
      << report.version << '\n';
  out << "set datafile separator ','\n";
  out << "set key autotitle columnhead\n";
  out << "set logscale x\n";
  out << "set xlabel 'eps'\n";
  out << "set ylabel 'ratio'\n";
  out << "plot '" << csv_name << "' using 1:4 with linespoints title '" << report.experiment
      << " ratio'\n";
}

}  // namespace vortexlab
