#include <cstdio>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#include "vortexlab/csv.hpp"
#include "vortexlab/experiments.hpp"

using namespace vortexlab;

namespace {

int cmd_energy(const std::string& kernel, const std::string& domain, const std::string& field,
               double eps, const std::string& scaling, double grid_h, const std::string& local) {
  EnergySpec spec{parse_kernel_spec(kernel), parse_domain_spec(domain), eps,
                  scaling == "bbm" ? Scaling::bbm : Scaling::vortex, grid_h};
  if (!local.empty()) spec.localization = parse_domain_spec(local);
  const Field f = parse_field_spec(field);
  const auto res = energy_detailed(spec, f);
  std::printf("eps,value,grid_h,nodes\n%.12g,%.12g,%.12g,%zu\n", eps, res.value, spec.step(),
              res.grid_nodes);
  return 0;
}

int cmd_xy(const std::string& field, const std::string& domain, double eps, const std::string& xi,
           const std::string& offset, const std::string& dump) {
  const Domain dom = parse_domain_spec(domain);
  const Field f = parse_field_spec(field);
  Vec2 xi_v{1.0, 0.0}, z_v{0.0, 0.0};
  if (!xi.empty()) {
    const auto parts = csv::split(xi, ',');
    xi_v = Vec2{std::stod(parts.at(0)), std::stod(parts.at(1))};
  }
  if (!offset.empty()) {
    const auto parts = csv::split(offset, ',');
    z_v = Vec2{std::stod(parts.at(0)), std::stod(parts.at(1))};
  }
  const LatticeField lf = sample(f, dom, eps, xi_v, z_v);
  if (!dump.empty()) dump_lattice_csv(lf, dump);
  const auto res = xy_energy_detailed(lf, dom);
  std::printf("eps,xy_energy,bonds\n%.12g,%.12g,%zu\n", eps, res.value, res.ordered_bonds);
  return 0;
}

int cmd_detect(const std::string& field, const std::string& domain, double eps) {
  const Domain dom = parse_domain_spec(domain);
  const Field f = parse_field_spec(field);
  const auto ex = extract_vortices(jacobian_measure(discretize(f, dom, eps)), dom);
  std::printf("x,y,degree\n");
  for (const auto& a : ex.current.atoms)
    std::printf("%.12g,%.12g,%d\n", a.position.x, a.position.y, a.degree);
  if (!ex.all_quantized) {
    std::fprintf(stderr, "warning: non-quantized cluster mass (field too coarse at eps=%g)\n",
                 eps);
    return 3;
  }
  return 0;
}

int cmd_flatnorm(const std::string& a_path, const std::string& b_path, const std::string& domain) {
  const Domain dom = parse_domain_spec(domain);
  const auto a = atoms_from_csv(a_path);
  const auto b = atoms_from_csv(b_path);
  const auto res = flat_norm(a, b, dom);
  std::printf("value\n%.12g\n", res.value);
  std::printf("from_x,from_y,to_x,to_y,to_boundary,mass,length\n");
  for (const auto& leg : res.plan)
    std::printf("%.12g,%.12g,%.12g,%.12g,%d,%.12g,%.12g\n", leg.from.x, leg.from.y, leg.to.x,
                leg.to.y, leg.to_boundary ? 1 : 0, leg.mass, leg.length);
  return 0;
}

int cmd_converge(const std::string& config_path) {
  const auto cfgs = parse_config_file(config_path);
  if (cfgs.empty()) throw std::runtime_error("converge: empty config");
  const auto& cfg = cfgs.front();
  const Domain dom = parse_domain_spec(cfg.domain);
  const Field f = parse_field_spec(cfg.field);
  AtomicCurrent target;
  if (const auto* mv = std::get_if<MultiVortex>(&f.rule())) target.atoms = mv->atoms;
  std::vector<std::pair<double, Field>> seq;
  for (double eps : cfg.eps_list) seq.emplace_back(eps, f);
  const auto report = convergence_check(seq, target, dom, cfg.deltas);
  std::printf("eps,delta,flat_distance,flag\n");
  for (const auto& row : report.rows)
    std::printf("%.12g,%.12g,%.12g,%s\n", row.eps, row.delta, row.distance,
                row.quantized ? "ok" : "non-quantized");
  return report.nonincreasing_per_delta ? 0 : 2;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  auto cfgs = parse_config_file(config_path);
  bool all_passed = true;
  for (auto& cfg : cfgs) {
    if (!out_override.empty()) cfg.out_dir = out_override + "/" + cfg.experiment;
    const auto rep = run_experiment(cfg);
    std::printf("%s: %s (%zu rows) -> %s/report.csv\n", rep.experiment.c_str(),
                rep.passed ? "pass" : "FAIL", rep.rows.size(), cfg.out_dir.c_str());
    all_passed = all_passed && rep.passed;
  }
  return all_passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vortexlab: nonlocal vortex energies, lattice XY sums, Jacobian currents and "
               "flat-norm diagnostics"};
  app.require_subcommand(1);

  std::string kernel = "indicator:1", domain = "ball:1", field = "vortex:0,0,1";
  std::string scaling = "vortex", local, xi, offset, dump;
  std::string a_path, b_path, config_path, out_dir;
  double eps = 0.1, grid_h = 0.0;

  auto* energy_cmd = app.add_subcommand("energy", "nonlocal energy of a field");
  energy_cmd->add_option("--kernel", kernel);
  energy_cmd->add_option("--domain", domain);
  energy_cmd->add_option("--field", field);
  energy_cmd->add_option("--eps", eps)->required();
  energy_cmd->add_option("--scaling", scaling)->check(CLI::IsMember({"vortex", "bbm"}));
  energy_cmd->add_option("--grid-h", grid_h);
  energy_cmd->add_option("--local", local);

  auto* xy_cmd = app.add_subcommand("xy", "discrete XY energy of lattice samples");
  xy_cmd->add_option("--field", field);
  xy_cmd->add_option("--domain", domain);
  xy_cmd->add_option("--eps", eps)->required();
  xy_cmd->add_option("--xi", xi, "lattice direction a,b");
  xy_cmd->add_option("--offset", offset, "lattice offset z1,z2 in cell units");
  xy_cmd->add_option("--dump", dump, "write the lattice as CSV i,j,vx,vy");

  auto* detect_cmd = app.add_subcommand("detect", "extract vortex atoms from a field");
  detect_cmd->add_option("--field", field);
  detect_cmd->add_option("--domain", domain);
  detect_cmd->add_option("--eps", eps)->required();

  auto* flat_cmd = app.add_subcommand("flatnorm", "flat distance between atom lists");
  flat_cmd->add_option("--a", a_path)->required();
  flat_cmd->add_option("--b", b_path)->required();
  flat_cmd->add_option("--domain", domain);

  auto* conv_cmd = app.add_subcommand("converge", "flat-convergence table for a config");
  conv_cmd->add_option("--config", config_path)->required();

  auto* run_cmd = app.add_subcommand("run", "run configured experiments");
  run_cmd->add_option("--config", config_path)->required();
  run_cmd->add_option("--out", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (energy_cmd->parsed()) return cmd_energy(kernel, domain, field, eps, scaling, grid_h, local);
    if (xy_cmd->parsed()) return cmd_xy(field, domain, eps, xi, offset, dump);
    if (detect_cmd->parsed()) return cmd_detect(field, domain, eps);
    if (flat_cmd->parsed()) return cmd_flatnorm(a_path, b_path, domain);
    if (conv_cmd->parsed()) return cmd_converge(config_path);
    if (run_cmd->parsed()) return cmd_run(config_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
