#include "dcomp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dcomp/errors.hpp"

namespace dcomp {

using nlohmann::json;

namespace {

int line_at(const std::string& text, size_t pos) {
  int line = 1;
  for (size_t i = 0; i < pos && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// line of the last key of `path` found in document order
int line_of(const std::string& text, const std::vector<std::string>& path) {
  size_t pos = 0, found = std::string::npos;
  for (const auto& key : path) {
    size_t p = text.find("\"" + key + "\"", pos);
    if (p == std::string::npos) break;
    found = p;
    pos = p + 1;
  }
  return found == std::string::npos ? 1 : line_at(text, found);
}

struct Ctx {
  const std::string& text;
  const std::string& source;

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string where;
    for (const auto& p : path) where += (where.empty() ? "" : ".") + p;
    throw ConfigError(source + ":" + std::to_string(line_of(text, path)) + ": " + where + ": " + msg);
  }

  void allow(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!keys.count(it.key())) {
        auto p = path;
        p.push_back(it.key());
        fail(p, "unknown key");
      }
  }

  double num(const json& obj, const std::vector<std::string>& path, const std::string& key, double def,
             bool positive = false) const {
    if (!obj.contains(key)) return def;
    auto p = path;
    p.push_back(key);
    if (!obj[key].is_number()) fail(p, "expected a number");
    double v = obj[key].get<double>();
    if (!std::isfinite(v)) fail(p, "must be finite");
    if (positive && !(v > 0)) fail(p, "must be positive");
    return v;
  }

  int integer(const json& obj, const std::vector<std::string>& path, const std::string& key, int def,
              int min_value) const {
    if (!obj.contains(key)) return def;
    auto p = path;
    p.push_back(key);
    if (!obj[key].is_number_integer()) fail(p, "expected an integer");
    int v = obj[key].get<int>();
    if (v < min_value) fail(p, "must be at least " + std::to_string(min_value));
    return v;
  }

  bool boolean(const json& obj, const std::vector<std::string>& path, const std::string& key, bool def) const {
    if (!obj.contains(key)) return def;
    auto p = path;
    p.push_back(key);
    if (!obj[key].is_boolean()) fail(p, "expected true or false");
    return obj[key].get<bool>();
  }

  Rect rect(const json& obj, const std::vector<std::string>& path, const std::string& key, Rect def) const {
    if (!obj.contains(key)) return def;
    auto p = path;
    p.push_back(key);
    const json& a = obj[key];
    if (!a.is_array() || a.size() != 4) fail(p, "expected [re_min, re_max, im_min, im_max]");
    for (const auto& v : a)
      if (!v.is_number()) fail(p, "expected numbers");
    Rect r{a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
    if (!(r.re_min < r.re_max && r.im_min < r.im_max)) fail(p, "empty rectangle");
    return r;
  }

  Eigen::MatrixXd matrix(const json& v, const std::vector<std::string>& path) const {
    if (v.is_number()) return Eigen::MatrixXd::Constant(1, 1, v.get<double>());
    if (!v.is_array() || v.empty() || !v[0].is_array()) fail(path, "expected a number or a list of rows");
    Eigen::MatrixXd m(v.size(), v[0].size());
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_array() || v[i].size() != v[0].size()) fail(path, "ragged matrix");
      for (size_t j = 0; j < v[i].size(); ++j) {
        if (!v[i][j].is_number()) fail(path, "expected numbers");
        m(i, j) = v[i][j].get<double>();
      }
    }
    return m;
  }

  StieltjesKernel kernel(const json& v, const std::vector<std::string>& path, double tau) const {
    allow(v, path, {"atoms", "density"});
    StieltjesKernel k = StieltjesKernel::zero(1, 1);
    bool first = true;
    auto set_dims = [&](const Eigen::MatrixXd& m, const std::vector<std::string>& p) {
      if (first) {
        k.out_dim = static_cast<int>(m.rows());
        k.in_dim = static_cast<int>(m.cols());
        first = false;
      } else if (m.rows() != k.out_dim || m.cols() != k.in_dim) {
        fail(p, "matrix shape differs from earlier entries");
      }
    };
    if (v.contains("atoms")) {
      auto p = path;
      p.push_back("atoms");
      if (!v["atoms"].is_array()) fail(p, "expected a list");
      for (const auto& a : v["atoms"]) {
        allow(a, p, {"theta", "matrix"});
        if (!a.contains("theta") || !a.contains("matrix")) fail(p, "atom needs theta and matrix");
        double th = num(a, p, "theta", 0.0);
        if (th > 0 || th < -tau) fail(p, "theta outside [-tau, 0]");
        Eigen::MatrixXd m = matrix(a["matrix"], p);
        set_dims(m, p);
        k.atoms.push_back({th, m});
      }
    }
    if (v.contains("density")) {
      auto p = path;
      p.push_back("density");
      if (!v["density"].is_array()) fail(p, "expected a list");
      for (const auto& d : v["density"]) {
        allow(d, p, {"from", "to", "matrix"});
        if (!d.contains("from") || !d.contains("to") || !d.contains("matrix")) fail(p, "piece needs from, to, matrix");
        double a = num(d, p, "from", 0.0), b = num(d, p, "to", 0.0);
        if (!(a < b) || a < -tau || b > 0) fail(p, "piece must satisfy -tau <= from < to <= 0");
        Eigen::MatrixXd m = matrix(d["matrix"], p);
        set_dims(m, p);
        k.density.push_back({a, b, m});
      }
    }
    return k;
  }
};

const std::map<std::string, std::map<std::string, double>>& preset_defaults() {
  static const std::map<std::string, std::map<std::string, double>> d{
      {"mackey-glass", {{"gamma", 0.1}, {"beta", 0.2}, {"kappa", 10.0}, {"tau", 1.0}}},
      {"suarez-schopf", {{"alpha", 0.75}, {"tau", 0.6}, {"x_max", -1.0}}},
      {"delay-decay", {{"tau", 1.0}, {"lambda", 0.1}}},
      {"ode-decay", {{"lambda", 0.5}}},
  };
  return d;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : preset_defaults()) out.push_back(k);
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(line_at(text, e.byte > 0 ? e.byte - 1 : 0)) +
                      ": malformed config: " + e.what());
  }
  Ctx c{text, source};
  RunConfig cfg;
  cfg.source = source;
  c.allow(doc, {}, {"model", "discretization", "m", "spectrum", "sweep", "simulate", "structural", "oracle",
                    "output", "jobs", "seed"});

  if (doc.contains("model")) {
    const json& m = doc["model"];
    c.allow(m, {"model"}, {"preset", "params", "tau", "alpha", "b", "c", "lambda"});
    if (m.contains("preset")) {
      if (!m["preset"].is_string()) c.fail({"model", "preset"}, "expected a string");
      cfg.model.preset = m["preset"].get<std::string>();
    }
    if (cfg.model.preset == "raw") {
      cfg.model.tau = c.num(m, {"model"}, "tau", 1.0, true);
      if (!m.contains("alpha")) c.fail({"model"}, "raw model needs alpha");
      cfg.model.alpha = c.kernel(m["alpha"], {"model", "alpha"}, cfg.model.tau);
      cfg.model.c_kernel = m.contains("c") ? c.kernel(m["c"], {"model", "c"}, cfg.model.tau)
                                           : StieltjesKernel::scalar_atom(0.0, 1.0);
      cfg.model.b = c.num(m, {"model"}, "b", 1.0);
      cfg.model.lambda = c.num(m, {"model"}, "lambda", 0.0);
      if (cfg.model.lambda < 0) c.fail({"model", "lambda"}, "must be nonnegative");
    } else {
      auto it = preset_defaults().find(cfg.model.preset);
      if (it == preset_defaults().end()) c.fail({"model", "preset"}, "unknown preset '" + cfg.model.preset + "'");
      cfg.model.params = it->second;
      if (m.contains("params")) {
        const json& p = m["params"];
        std::set<std::string> keys;
        for (const auto& [k, v] : it->second) keys.insert(k);
        c.allow(p, {"model", "params"}, keys);
        for (auto pi = p.begin(); pi != p.end(); ++pi)
          cfg.model.params[pi.key()] = c.num(p, {"model", "params"}, pi.key(), 0.0);
      }
      for (const char* k : {"tau", "alpha", "b", "c", "lambda"})
        if (m.contains(k)) c.fail({"model", k}, "only valid with preset \"raw\"");
    }
  }

  if (doc.contains("discretization")) {
    const json& d = doc["discretization"];
    c.allow(d, {"discretization"}, {"grid_n", "dt"});
    cfg.grid_n = c.integer(d, {"discretization"}, "grid_n", cfg.grid_n, 2);
    if (d.contains("dt") && !d["dt"].is_null()) cfg.dt = c.num(d, {"discretization"}, "dt", 0.0, true);
  }
  cfg.m = c.integer(doc, {}, "m", cfg.m, 1);
  if (cfg.m > 3) c.fail({"m"}, "orders above 3 are not supported");

  if (doc.contains("spectrum")) {
    const json& s = doc["spectrum"];
    c.allow(s, {"spectrum"}, {"region", "window", "nu0_floor"});
    cfg.region = c.rect(s, {"spectrum"}, "region", cfg.region);
    cfg.window = c.rect(s, {"spectrum"}, "window", cfg.window);
    cfg.nu0_floor = c.num(s, {"spectrum"}, "nu0_floor", cfg.nu0_floor);
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    c.allow(s, {"sweep"}, {"nu0", "omega_max", "d_omega", "n_u", "n_m", "T", "lambda", "lipschitz_safety",
                           "max_refinements"});
    if (s.contains("nu0")) {
      if (s["nu0"].is_string()) {
        if (s["nu0"].get<std::string>() != "auto") c.fail({"sweep", "nu0"}, "expected a number or \"auto\"");
        cfg.nu0.reset();
      } else {
        cfg.nu0 = c.num(s, {"sweep"}, "nu0", 0.0);
      }
    }
    if (s.contains("lambda")) {
      if (s["lambda"].is_string()) {
        if (s["lambda"].get<std::string>() != "auto-from-preset")
          c.fail({"sweep", "lambda"}, "expected a number or \"auto-from-preset\"");
        cfg.lambda.reset();
      } else {
        cfg.lambda = c.num(s, {"sweep"}, "lambda", 0.0);
        if (*cfg.lambda < 0) c.fail({"sweep", "lambda"}, "must be nonnegative");
      }
    }
    cfg.omega_max = c.num(s, {"sweep"}, "omega_max", cfg.omega_max);
    if (cfg.omega_max < 0) c.fail({"sweep", "omega_max"}, "must be nonnegative (0 selects the default)");
    cfg.d_omega = c.num(s, {"sweep"}, "d_omega", cfg.d_omega, true);
    if (cfg.omega_max > 0 && cfg.omega_max < cfg.d_omega) c.fail({"sweep", "omega_max"}, "smaller than d_omega");
    cfg.n_u = c.integer(s, {"sweep"}, "n_u", cfg.n_u, 1);
    cfg.n_m = c.integer(s, {"sweep"}, "n_m", cfg.n_m, 1);
    cfg.T = c.num(s, {"sweep"}, "T", cfg.T, true);
    cfg.lipschitz_safety = c.num(s, {"sweep"}, "lipschitz_safety", cfg.lipschitz_safety);
    if (cfg.lipschitz_safety < 1) c.fail({"sweep", "lipschitz_safety"}, "must be at least 1");
    cfg.max_refinements = c.integer(s, {"sweep"}, "max_refinements", cfg.max_refinements, 0);
  }

  if (doc.contains("simulate")) {
    const json& s = doc["simulate"];
    c.allow(s, {"simulate"}, {"t_end", "initial", "value", "with_gain"});
    cfg.sim_t_end = c.num(s, {"simulate"}, "t_end", cfg.sim_t_end, true);
    if (s.contains("initial")) {
      if (!s["initial"].is_string()) c.fail({"simulate", "initial"}, "expected a string");
      cfg.sim_initial = s["initial"].get<std::string>();
      if (cfg.sim_initial != "constant" && cfg.sim_initial != "cos")
        c.fail({"simulate", "initial"}, "expected \"constant\" or \"cos\"");
    }
    cfg.sim_value = c.num(s, {"simulate"}, "value", cfg.sim_value);
    cfg.sim_with_gain = c.boolean(s, {"simulate"}, "with_gain", cfg.sim_with_gain);
  }

  if (doc.contains("structural")) {
    const json& s = doc["structural"];
    c.allow(s, {"structural"}, {"divisors", "nu", "horizon"});
    if (s.contains("divisors")) {
      const json& d = s["divisors"];
      if (!d.is_array() || d.size() < 2) c.fail({"structural", "divisors"}, "expected at least two integers");
      cfg.structural_divisors.clear();
      for (const auto& v : d) {
        if (!v.is_number_integer() || v.get<int>() < 2) c.fail({"structural", "divisors"}, "expected integers >= 2");
        cfg.structural_divisors.push_back(v.get<int>());
      }
    }
    cfg.structural_nu = c.num(s, {"structural"}, "nu", cfg.structural_nu);
    cfg.structural_horizon = c.num(s, {"structural"}, "horizon", cfg.structural_horizon, true);
  }

  if (doc.contains("oracle")) {
    const json& o = doc["oracle"];
    c.allow(o, {"oracle"}, {"grid_n", "break_trace"});
    cfg.oracle_grid_n = c.integer(o, {"oracle"}, "grid_n", cfg.oracle_grid_n, 4);
    cfg.oracle_break_trace = c.boolean(o, {"oracle"}, "break_trace", cfg.oracle_break_trace);
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    c.allow(o, {"output"}, {"dir"});
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) c.fail({"output", "dir"}, "expected a string");
      cfg.out_dir = o["dir"].get<std::string>();
    }
  }
  cfg.jobs = c.integer(doc, {}, "jobs", cfg.jobs, 0);
  cfg.seed = static_cast<unsigned>(c.integer(doc, {}, "seed", static_cast<int>(cfg.seed), 0));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ":1: cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

Preset build_model(const RunConfig& cfg) {
  const auto& m = cfg.model;
  auto p = [&](const char* k) {
    auto it = m.params.find(k);
    if (it != m.params.end()) return it->second;
    auto d = preset_defaults().find(m.preset);
    if (d == preset_defaults().end() || !d->second.count(k))
      throw ConfigError(cfg.source + ":1: preset '" + m.preset + "' has no parameter '" + k + "'");
    return d->second.at(k);
  };
  if (m.preset == "mackey-glass") return build_mackey_glass(p("gamma"), p("beta"), p("kappa"), p("tau"));
  if (m.preset == "suarez-schopf") return build_suarez_schopf(p("alpha"), p("tau"), p("x_max"));
  if (m.preset == "delay-decay") return build_delay_decay(p("tau"), p("lambda"));
  if (m.preset == "ode-decay") return build_ode_decay(p("lambda"));
  if (m.preset == "raw") {
    Preset r;
    auto& md = r.model;
    md.name = "raw";
    md.n = m.alpha.out_dim;
    md.tau = m.tau;
    md.alpha = m.alpha;
    md.b_tilde = Eigen::MatrixXd::Constant(md.n, 1, m.b);
    md.c_kernel = m.c_kernel;
    md.lambda_gain = m.lambda;
    md.validate();
    r.report.lambda = m.lambda;
    return r;
  }
  throw ConfigError(cfg.source + ":1: unknown preset '" + m.preset + "'");
}

}  // namespace dcomp
