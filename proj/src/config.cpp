#include "rydflux/config.hpp"

#include <fstream>
#include <set>
#include <thread>

#include "rydflux/errors.hpp"

namespace rydflux {

using nlohmann::json;

namespace {

// Reads keys of one object and rejects anything it was not asked about.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: '" + display() + "' must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: bad value for key '" + path_ + key + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(j_.contains(key) ? j_.at(key) : empty(), path_ + key + ".");
  }

  const json& at(const std::string& key) const { return j_.at(key); }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError("config: unknown key '" + path_ + item.key() + "'");
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  std::string display() const { return path_.empty() ? "<root>" : path_.substr(0, path_.size() - 1); }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read(Reader r, TorusConfig& t) {
  r.get("lx", t.lx);
  r.get("ly", t.ly);
  r.get("nu", t.nu);
  r.finish();
}

json torus_json(const TorusConfig& t) { return {{"lx", t.lx}, {"ly", t.ly}, {"nu", t.nu}}; }

json offsets_json(const std::vector<AncillaOffset>& offsets) {
  json arr = json::array();
  for (const auto& o : offsets) arr.push_back({o.x, o.z});
  return arr;
}

}  // namespace

LatticeSpec LatticeConfig::to_spec() const {
  LatticeSpec spec = build_spec(p, q, a_over_b);
  if (b_offsets) {
    spec.b_offsets = *b_offsets;
    validate_spec(spec);
  }
  return spec;
}

LatticeConfig LatticeConfig::from_spec(const LatticeSpec& spec) {
  LatticeConfig c;
  c.p = spec.p;
  c.q = spec.q;
  c.a_over_b = spec.a / spec.b;
  c.b_offsets = spec.b_offsets;
  return c;
}

int RunConfig::resolved_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  Reader root(j, "");

  {
    Reader r = root.child("lattice");
    r.get("p", c.lattice.p);
    r.get("q", c.lattice.q);
    r.get("a_over_b", c.lattice.a_over_b);
    if (r.has("b_offsets")) {
      const json& arr = r.at("b_offsets");
      if (!arr.is_array()) throw ConfigError("config: 'lattice.b_offsets' must be a list of [x, z] pairs");
      std::vector<AncillaOffset> offsets;
      for (const auto& pair : arr) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
          throw ConfigError("config: 'lattice.b_offsets' must be a list of [x, z] pairs");
        offsets.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
      c.lattice.b_offsets = offsets;
    }
    r.finish();
  }
  {
    Reader r = root.child("coupling");
    r.get("w", c.coupling.w);
    r.get("mu", c.coupling.mu);
    r.get("t_minus", c.coupling.t_minus);
    r.get("cutoff_radius", c.coupling.cutoff_radius);
    r.get("b_sum_tolerance", c.coupling.b_sum_tolerance);
    std::string mode = to_string(c.mode);
    r.get("mode", mode);
    c.mode = parse_coupling_mode(mode);
    r.finish();
  }
  {
    Reader r = root.child("winding");
    r.get("c_over_a", c.winding.c_over_a);
    r.get("samples", c.winding.samples);
    r.finish();
  }
  {
    Reader r = root.child("critical");
    r.get("lo", c.critical.lo);
    r.get("hi", c.critical.hi);
    r.get("rel_tol", c.critical.rel_tol);
    r.finish();
  }
  {
    Reader r = root.child("optimize");
    auto& o = c.optimize;
    r.get("rounds", o.rounds);
    r.get("tol", o.tol);
    r.get("lambda_points", o.lambda_points);
    r.get("initial_step", o.options.initial_step);
    r.get("min_step", o.options.min_step);
    r.get("grow", o.options.grow);
    r.get("shrink", o.options.shrink);
    r.get("max_sweeps", o.options.max_sweeps);
    r.get("barrier_sum_tolerance", o.options.barrier_sum_tolerance);
    r.get("min_relative_hop", o.options.min_relative_hop);
    r.finish();
  }
  {
    Reader r = root.child("bands");
    r.get("path_points", c.bands.path_points);
    r.get("chern_grid", c.bands.chern_grid);
    r.get("grouping", c.bands.grouping);
    if (c.bands.grouping != "strict" && c.bands.grouping != "merge_touching")
      throw ConfigError("config: 'bands.grouping' must be strict or merge_touching");
    r.finish();
  }
  {
    Reader r = root.child("dos");
    r.get("grid", c.dos.grid);
    r.get("broadening", c.dos.broadening);
    r.get("points", c.dos.points);
    r.finish();
  }
  {
    Reader r = root.child("couplings");
    r.get("lx", c.couplings.lx);
    r.get("ly", c.couplings.ly);
    r.finish();
  }
  {
    Reader r = root.child("solver");
    r.get("nev", c.solver.nev);
    r.get("ncv", c.solver.ncv);
    r.get("tol", c.solver.tol);
    r.get("max_restarts", c.solver.max_restarts);
    r.get("memory_budget_gb", c.solver.memory_budget_gb);
    r.finish();
  }
  {
    Reader r = root.child("ed");
    read(r.child("torus"), c.ed.torus);
    r.get("axis", c.ed.axis);
    if (c.ed.axis != "x" && c.ed.axis != "y") throw ConfigError("config: 'ed.axis' must be x or y");
    r.get("fixed_angle", c.ed.fixed_angle);
    r.get("points", c.ed.points);
    r.finish();
  }
  {
    Reader r = root.child("chern");
    read(r.child("torus"), c.chern.torus);
    r.get("grid", c.chern.grid);
    r.get("manifold_dim", c.chern.manifold_dim);
    r.get("degeneracy_ratio", c.chern.degeneracy_ratio);
    r.get("gap_tol", c.chern.gap_tol);
    r.finish();
  }
  root.get("output_dir", c.output_dir);
  root.get("seed", c.seed);
  root.get("threads", c.threads);
  root.finish();

  c.coupling.validate();
  if (c.threads < 0) throw ConfigError("config: 'threads' must be >= 0");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const LatticeSpec& spec) {
  return {{"p", spec.p}, {"q", spec.q}, {"a_over_b", spec.a / spec.b}, {"b_offsets", offsets_json(spec.b_offsets)}};
}

json to_json(const RunConfig& c) {
  json lattice = {{"p", c.lattice.p}, {"q", c.lattice.q}, {"a_over_b", c.lattice.a_over_b}};
  lattice["b_offsets"] = offsets_json(c.lattice.to_spec().b_offsets);
  const auto& o = c.optimize;
  return {
      {"lattice", lattice},
      {"coupling",
       {{"w", c.coupling.w},
        {"mu", c.coupling.mu},
        {"t_minus", c.coupling.t_minus},
        {"cutoff_radius", c.coupling.cutoff_radius},
        {"b_sum_tolerance", c.coupling.b_sum_tolerance},
        {"mode", to_string(c.mode)}}},
      {"winding", {{"c_over_a", c.winding.c_over_a}, {"samples", c.winding.samples}}},
      {"critical", {{"lo", c.critical.lo}, {"hi", c.critical.hi}, {"rel_tol", c.critical.rel_tol}}},
      {"optimize",
       {{"rounds", o.rounds},
        {"tol", o.tol},
        {"lambda_points", o.lambda_points},
        {"initial_step", o.options.initial_step},
        {"min_step", o.options.min_step},
        {"grow", o.options.grow},
        {"shrink", o.options.shrink},
        {"max_sweeps", o.options.max_sweeps},
        {"barrier_sum_tolerance", o.options.barrier_sum_tolerance},
        {"min_relative_hop", o.options.min_relative_hop}}},
      {"bands",
       {{"path_points", c.bands.path_points}, {"chern_grid", c.bands.chern_grid}, {"grouping", c.bands.grouping}}},
      {"dos", {{"grid", c.dos.grid}, {"broadening", c.dos.broadening}, {"points", c.dos.points}}},
      {"couplings", {{"lx", c.couplings.lx}, {"ly", c.couplings.ly}}},
      {"solver",
       {{"nev", c.solver.nev},
        {"ncv", c.solver.ncv},
        {"tol", c.solver.tol},
        {"max_restarts", c.solver.max_restarts},
        {"memory_budget_gb", c.solver.memory_budget_gb}}},
      {"ed",
       {{"torus", torus_json(c.ed.torus)},
        {"axis", c.ed.axis},
        {"fixed_angle", c.ed.fixed_angle},
        {"points", c.ed.points}}},
      {"chern",
       {{"torus", torus_json(c.chern.torus)},
        {"grid", c.chern.grid},
        {"manifold_dim", c.chern.manifold_dim},
        {"degeneracy_ratio", c.chern.degeneracy_ratio},
        {"gap_tol", c.chern.gap_tol}}},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
      {"threads", c.threads},
  };
}

}  // namespace rydflux
