#include "rydflux/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "rydflux/errors.hpp"
#include "rydflux/fluxmap.hpp"
#include "rydflux/manybody.hpp"
#include "rydflux/spectrum.hpp"

namespace rydflux {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream out(dir_ / name);
    if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
    out << std::setprecision(17);
    return out;
  }

  void write_json(const std::string& name, json j) {
    j["schema_version"] = kSchemaVersion;
    open(name) << j.dump(2) << '\n';
  }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

json stats_json(const HomogeneityStats& s) {
  return {{"mean_hop", s.mean_hop},
          {"mean_flux", s.mean_flux},
          {"c_flux", s.flux_variance_normalized},
          {"c_hop", s.hop_variance_normalized}};
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

EDOptions ed_options(const RunConfig& c) {
  EDOptions o;
  o.lanczos.nev = c.solver.nev;
  o.lanczos.ncv = c.solver.ncv;
  o.lanczos.tol = c.solver.tol;
  o.lanczos.max_restarts = c.solver.max_restarts;
  o.lanczos.seed = c.seed;
  o.threads = c.resolved_threads();
  o.memory_budget = c.solver.memory_budget_gb * 1e9;
  return o;
}

json solver_json(const EDOptions& o) {
  return {{"method", "thick-restart Lanczos"},
          {"nev", o.lanczos.nev},
          {"ncv", o.lanczos.ncv},
          {"tol", o.lanczos.tol},
          {"max_restarts", o.lanczos.max_restarts},
          {"seed", o.lanczos.seed}};
}

struct TorusSetup {
  CouplingGraph graph;
  int n_particles;
};

TorusSetup torus_setup(const RunConfig& c, const TorusConfig& t) {
  const FiniteLattice lattice(c.lattice.to_spec(), t.lx, t.ly);
  return {assemble_graph(lattice, c.coupling, c.mode), particle_count(lattice, c.coupling, t.nu)};
}

void cmd_winding(const RunConfig& c, Output& out, std::ostream& log) {
  const WindingProfile w = winding_profile(c.winding.c_over_a, c.coupling, c.winding.samples);
  auto csv = out.open("winding.csv");
  csv << "x,re_t,im_t,phase_unwrapped\n";
  for (std::size_t k = 0; k < w.x.size(); ++k)
    csv << w.x[k] << ',' << w.t[k].real() << ',' << w.t[k].imag() << ',' << w.phase_unwrapped[k] << '\n';
  out.write_json("winding.json", {{"c_over_a", w.c_over_a}, {"n", w.n}, {"samples", c.winding.samples}});
  log << "winding number n = " << w.n << " at c/a = " << w.c_over_a << '\n';
}

void cmd_critical(const RunConfig& c, Output& out, std::ostream& log) {
  const auto roots = critical_ratios(c.coupling, c.critical.lo, c.critical.hi, c.critical.rel_tol);
  out.write_json("critical.json", {{"lo", c.critical.lo}, {"hi", c.critical.hi}, {"critical_ratios", roots}});
  log << "critical c/a:";
  for (double r : roots) log << ' ' << r;
  log << '\n';
}

void cmd_optimize(const RunConfig& c, Output& out, std::ostream& log) {
  const auto& o = c.optimize;
  const IterateResult r = iterate(c.lattice.to_spec(), c.coupling, o.rounds, o.tol, o.lambda_points, o.options);
  const HomogeneityStats before = cell_stats(r.initial, c.coupling);
  const HomogeneityStats after = cell_stats(r.final, c.coupling);
  out.write_json("spec.json", {{"lattice", to_json(r.final)}, {"stats", stats_json(after)}});
  json points = json::array();
  for (const auto& p : r.trace)
    points.push_back({{"lambda", p.lambda},
                      {"c_hop", p.c_hop},
                      {"c_flux", p.c_flux},
                      {"mean_hop", p.mean_hop},
                      {"mean_flux", p.mean_flux}});
  out.write_json("trace.json", {{"initial", stats_json(before)},
                                {"final", stats_json(after)},
                                {"rounds_used", r.rounds_used},
                                {"converged", r.converged},
                                {"flux_quanta", r.state.flux_quanta},
                                {"points", points}});
  log << "mean hop " << before.mean_hop << " -> " << after.mean_hop << ", C[flux] " << after.flux_variance_normalized
      << ", C[|t|] " << after.hop_variance_normalized << (r.converged ? "" : " (not converged)") << '\n';
  if (!r.converged)
    throw NumericalError("optimizer did not reach tol " + std::to_string(o.tol) + " within " +
                         std::to_string(o.rounds) + " rounds");
}

void cmd_bands(const RunConfig& c, Output& out, std::ostream& log) {
  const LatticeSpec spec = c.lattice.to_spec();
  const CellGraph graph = assemble_cell_graph(spec, c.coupling, c.mode);
  const BandData data = bands(graph, k_path(spec, c.bands.path_points));
  auto csv = out.open("bands.csv");
  csv << "k_index,k_x,k_y";
  for (int b = 0; b < data.num_bands(); ++b) csv << ",E_" << b + 1;
  csv << '\n';
  for (std::size_t i = 0; i < data.k.size(); ++i) {
    csv << i << ',' << data.k[i].x() << ',' << data.k[i].y();
    for (int b = 0; b < data.num_bands(); ++b) csv << ',' << data.energies(static_cast<Eigen::Index>(i), b);
    csv << '\n';
  }
  const auto grouping = c.bands.grouping == "strict" ? BandGrouping::strict : BandGrouping::merge_touching;
  const BandTopology topo = band_chern(graph, c.bands.chern_grid, grouping);
  json groups = json::array();
  for (const auto& g : topo.groups) groups.push_back({{"first", g.first}, {"count", g.count}, {"chern", g.chern}});
  out.write_json("topology.json", {{"grid", c.bands.chern_grid},
                                   {"groups", groups},
                                   {"bandwidths", topo.bandwidths},
                                   {"gaps", topo.gaps},
                                   {"flatness", topo.flatness}});
  log << "bands written; lowest gap " << (topo.gaps.empty() ? 0.0 : topo.gaps[0]) << '\n';
}

void cmd_dos(const RunConfig& c, Output& out, std::ostream& log) {
  const CellGraph graph = assemble_cell_graph(c.lattice.to_spec(), c.coupling, c.mode);
  const BandData data = bands_on_grid(graph, c.dos.grid, c.dos.grid);
  const double broadening = c.dos.broadening > 0 ? c.dos.broadening : default_broadening(data);
  auto csv = out.open("dos.csv");
  csv << "energy,density\n";
  for (const auto& p : dos(data, broadening, c.dos.points)) csv << p.energy << ',' << p.density << '\n';
  log << "dos written with broadening " << broadening << '\n';
}

void cmd_couplings(const RunConfig& c, Output& out, std::ostream& log) {
  const FiniteLattice lattice(c.lattice.to_spec(), c.couplings.lx, c.couplings.ly);
  const CouplingGraph graph = assemble_graph(lattice, c.coupling, c.mode);
  auto txt = out.open("edges.txt");
  write_edge_list(txt, graph);
  log << graph.couplings.size() << " bonds written\n";
}

void cmd_ed(const RunConfig& c, Output& out, std::ostream& log) {
  const EDOptions opts = ed_options(c);
  const TorusSetup setup = torus_setup(c, c.ed.torus);
  const Sector sector(setup.graph.lattice.num_sites(), setup.n_particles, opts.memory_budget, opts.lanczos.ncv + 8);
  const auto axis = c.ed.axis == "x" ? TwistAxis::x : TwistAxis::y;
  const auto scan = twist_scan(sector, setup.graph, axis, c.ed.fixed_angle, c.ed.points, opts);
  json points = json::array();
  for (const auto& r : scan)
    points.push_back({{"theta_x", r.twist.theta_x},
                      {"theta_y", r.twist.theta_y},
                      {"energies", vec_json(r.eigenvalues)},
                      {"residuals", vec_json(r.residuals)}});
  out.write_json("edscan.json", {{"lx", c.ed.torus.lx},
                                 {"ly", c.ed.torus.ly},
                                 {"n_particles", setup.n_particles},
                                 {"dim", sector.dim()},
                                 {"axis", c.ed.axis},
                                 {"fixed_angle", c.ed.fixed_angle},
                                 {"energy_scale", energy_scale(setup.graph)},
                                 {"solver", solver_json(opts)},
                                 {"points", points}});
  log << "twist scan of " << scan.size() << " points, dim " << sector.dim() << '\n';
}

void cmd_chern(const RunConfig& c, Output& out, std::ostream& log) {
  const EDOptions opts = ed_options(c);
  const TorusSetup setup = torus_setup(c, c.chern.torus);
  const int vectors = opts.lanczos.ncv + 8 + (c.chern.grid + 1) * c.chern.manifold_dim;
  const Sector sector(setup.graph.lattice.num_sites(), setup.n_particles, opts.memory_budget, vectors);
  ChernOptions co;
  co.degeneracy_ratio = c.chern.degeneracy_ratio;
  co.gap_tol = c.chern.gap_tol;
  json j = {{"lx", c.chern.torus.lx},
            {"ly", c.chern.torus.ly},
            {"n_particles", setup.n_particles},
            {"dim", sector.dim()},
            {"grid", c.chern.grid},
            {"manifold_dim", c.chern.manifold_dim},
            {"solver", solver_json(opts)}};
  try {
    const ChernResult r = many_body_chern(sector, setup.graph, c.chern.grid, c.chern.manifold_dim, opts, co);
    j["chern"] = r.chern;
    j["raw_chern"] = r.raw_chern;
    j["energy_scale"] = r.energy_scale;
    j["gap_map"] = r.gap_map;
    j["splitting_map"] = r.splitting_map;
    j["min_gap"] = r.min_gap();
    j["max_splitting"] = r.max_splitting();
    j["degenerate"] = r.quasi_degenerate(co.degeneracy_ratio);
    out.write_json("chern.json", j);
    log << "many-body Chern number " << r.chern << '\n';
  } catch (const GapClosureError& e) {
    j["error"] = e.what();
    j["gap_map"] = e.gap_map;
    out.write_json("chern.json", j);
    throw;
  }
}

using Handler = void (*)(const RunConfig&, Output&, std::ostream&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"winding", cmd_winding}, {"critical", cmd_critical},   {"optimize", cmd_optimize}, {"bands", cmd_bands},
      {"dos", cmd_dos},         {"couplings", cmd_couplings}, {"ed", cmd_ed},             {"chern", cmd_chern},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& h : handlers()) n.push_back(h.first);
    return n;
  }();
  return names;
}

void run_command(const std::string& command, const RunConfig& config, std::ostream& log) {
  Handler handler = nullptr;
  for (const auto& h : handlers())
    if (h.first == command) handler = h.second;
  if (!handler) throw ConfigError("unknown command '" + command + "'");

  Output out(config.output_dir);
  const auto start = std::chrono::steady_clock::now();
  std::string status = "ok";
  std::exception_ptr failure;
  try {
    handler(config, out, log);
  } catch (const std::exception& e) {
    status = e.what();
    failure = std::current_exception();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"command", command},
                   {"config", to_json(config)},
                   {"status", status},
                   {"outputs", out.files()},
                   {"versions",
                    {{"rydflux", "0.1.0"},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"boost", BOOST_LIB_VERSION},
                     {"compiler", __VERSION__}}},
                   {"wall_time_s", wall}};
  out.write_json("manifest.json", manifest);
  if (failure) std::rethrow_exception(failure);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic flux lattices: hoppings, optimization, bands and exact diagonalization"};
  std::string command;
  std::string config_path;
  std::string output_dir;
  app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(commands()));
  app.add_option("config", config_path, "JSON run configuration")->required();
  app.add_option("-o,--output-dir", output_dir, "Overrides output_dir of the config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    run_command(command, config, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace rydflux
