#include "dcomp/cli.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "dcomp/errors.hpp"
#include "dcomp/structural_cauchy.hpp"
#include "dcomp/transfer_operator.hpp"

namespace dcomp {

using nlohmann::json;

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const OutputOptions& out, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(out.dir);
  std::ofstream f(std::filesystem::path(out.dir) / name, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + (std::filesystem::path(out.dir) / name).string());
  f << text;
}

void write_json(const OutputOptions& out, const std::string& name, const json& j) {
  if (out.json) write_file(out, name, j.dump(2) + "\n");
}

void write_csv(const OutputOptions& out, const std::string& name, const std::string& text) {
  if (out.csv) write_file(out, name, text);
}

json roots_json(const std::vector<Root>& roots) {
  json a = json::array();
  for (const auto& r : roots)
    a.push_back({{"re", r.value.real()}, {"im", r.value.imag()}, {"multiplicity", r.multiplicity},
                 {"residual", r.residual}});
  return a;
}

json spectrum_json(const SpectrumOutcome& s) {
  const auto& r = s.report;
  json j;
  j["m"] = r.m;
  j["base_roots"] = roots_json(r.base_roots);
  json e = json::array();
  for (const auto& ev : r.eigenvalues)
    e.push_back({{"re", ev.value.real()},
                 {"im", ev.value.imag()},
                 {"tensor_mult", ev.tensor_mult},
                 {"antisym_mult", ev.antisym_mult},
                 {"decompositions", ev.decompositions}});
  j["eigenvalues"] = e;
  j["s_antisym"] = num_or_null(r.bound.s_antisym);
  j["s_tensor"] = num_or_null(r.bound.s_tensor);
  j["s_bound"] = num_or_null(s.s_bound);
  j["nu0"] = r.nu0;
  j["nu0_auto"] = r.nu0_auto;
  j["gap_rank_antisym"] = r.line_hits_antisym ? json(nullptr) : json(r.antisym.j);
  j["gap_rank_tensor"] = r.line_hits_tensor ? json(nullptr) : json(r.tensor.j);
  j["line_distance_antisym"] = num_or_null(r.antisym.min_distance);
  j["line_distance_tensor"] = num_or_null(r.tensor.min_distance);
  j["required_root_floor"] = r.required_root_floor;
  std::vector<std::string> notes = r.notes;
  notes.insert(notes.end(), s.notes.begin(), s.notes.end());
  j["notes"] = notes;
  return j;
}

json localization_json(const Preset& p) {
  const auto& r = p.report;
  return {{"model", p.model.name},
          {"tau", p.model.tau},
          {"equilibria", r.equilibria},
          {"x_star", r.x_star},
          {"fprime_star", r.fprime_star},
          {"x_max", r.x_max},
          {"lambda", p.model.lambda_gain},
          {"shift", r.shift},
          {"trivially_stable", r.trivially_stable},
          {"inside_stable_region", r.inside_stable_region},
          {"notes", r.notes}};
}

HistoryElement smooth(const Grid& g, double a, double b, double c) {
  return embed_continuous([=](double t) { return a * std::cos(b * t) + c * std::sin(t + 0.3); }, g);
}

}  // namespace

SpectrumOutcome spectrum_pipeline(const RunConfig& cfg) {
  SpectrumOutcome s;
  s.preset = build_model(cfg);
  auto roots = characteristic_roots(s.preset.model, cfg.region);
  s.report = build_spectrum_report(roots, cfg.m, cfg.region, cfg.window, cfg.nu0, cfg.nu0_floor);
  s.s_bound = s.report.bound.effective();
  if (!std::isfinite(s.s_bound)) {
    s.s_bound = cfg.window.re_min;
    s.notes.push_back("no compound eigenvalues in the window; growth bound taken as the window edge " +
                      g17(s.s_bound));
  }
  for (const auto& n : s.preset.report.notes) s.notes.push_back(n);
  return s;
}

VerifyOutcome verify_pipeline(const RunConfig& cfg) {
  VerifyOutcome v;
  v.spectrum = spectrum_pipeline(cfg);
  const auto& model = v.spectrum.preset.model;
  const auto& rep = v.spectrum.report;
  SweepConfig& sc = v.sweep_config;
  sc.nu0 = rep.nu0;
  sc.s_bound = v.spectrum.s_bound;
  if (!(-sc.nu0 > sc.s_bound))
    throw LaplaceRouteError("line Re p = " + g17(-sc.nu0) + " does not lie right of the growth bound " +
                            g17(sc.s_bound) + "; Laplace route invalid, use dense oracle");
  v.lambda_auto = !cfg.lambda.has_value();
  sc.lambda = cfg.lambda.value_or(model.lambda_gain);
  v.omega_max_auto = cfg.omega_max == 0.0;
  sc.omega_max = v.omega_max_auto ? default_omega_max(sc.s_bound, model.tau) : cfg.omega_max;
  sc.d_omega = cfg.d_omega;
  sc.n_u = cfg.n_u;
  sc.n_m = cfg.n_m;
  sc.grid_n = cfg.grid_n;
  sc.m = cfg.m;
  sc.T = cfg.T;
  sc.lipschitz_safety = cfg.lipschitz_safety;
  sc.max_refinements = cfg.max_refinements;
  sc.jobs = cfg.jobs;

  v.header = {
      "model = " + model.name + ", tau = " + g17(model.tau) + ", m = " + std::to_string(cfg.m),
      "nu0 = " + g17(sc.nu0) + (rep.nu0_auto ? " (auto: widest spectral gap)" : ""),
      "lambda = " + g17(sc.lambda) + (v.lambda_auto ? " (auto-from-preset)" : ""),
      "omega_max = " + g17(sc.omega_max) + (v.omega_max_auto ? " (auto: 20 max(1, |s|, 2 pi / tau))" : ""),
      "growth bound s = " + g17(sc.s_bound),
      "grid_n = " + std::to_string(sc.grid_n) + ", n_u = " + std::to_string(sc.n_u) +
          ", n_m = " + std::to_string(sc.n_m) + ", T = " + g17(sc.T) + ", d_omega = " + g17(sc.d_omega),
  };
  v.report = sweep(make_sweep_cache(model, sc), sc);
  switch (v.report.verdict) {
    case Verdict::verified:
      v.exit_code = 0;
      v.conclusions.push_back("frequency inequality holds on the window: sup alpha = " + g17(v.report.sup) +
                              " < 1/lambda = " + g17(v.report.threshold));
      if (cfg.m == 2)
        v.conclusions.push_back(
            "Bendixson-type conclusion for m = 2: absence of closed invariant contours (window-limited verdict)");
      break;
    case Verdict::violated:
      v.exit_code = 1;
      v.conclusions.push_back("frequency inequality fails: sup alpha = " + g17(v.report.sup) +
                              " >= 1/lambda = " + g17(v.report.threshold));
      break;
    default:
      v.exit_code = 2;
      v.conclusions.push_back("inconclusive: sup alpha plus the inter-node bound reaches 1/lambda");
  }
  return v;
}

std::string sweep_csv(const SweepReport& r) {
  std::string s = "omega,alpha,margin\n";
  for (size_t i = 0; i < r.omega.size(); ++i) {
    double margin = r.threshold - r.alpha[i];
    s += g17(r.omega[i]) + "," + (std::isfinite(r.alpha[i]) ? g17(r.alpha[i]) : "nan") + "," +
         (std::isfinite(margin) ? g17(margin) : (std::isnan(margin) ? "nan" : "inf")) + "\n";
  }
  return s;
}

std::string spectrum_csv(const SpectrumReport& r) {
  std::string s = "re,im,tensor_mult,antisym_mult\n";
  for (const auto& e : r.eigenvalues)
    s += g17(e.value.real()) + "," + g17(e.value.imag()) + "," + std::to_string(e.tensor_mult) + "," +
         std::to_string(e.antisym_mult) + "\n";
  return s;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StructuralOutcome structural_pipeline(const RunConfig& cfg) {
  Preset p = build_model(cfg);
  if (p.model.n != 1) throw ConfigError(cfg.source + ":1: structural check needs a scalar model");
  StructuralOutcome out;
  std::vector<double> hs, errs;
  for (int d : cfg.structural_divisors) {
    Grid g{p.model.tau, d};
    DecomposableData x0;
    x0.factors = {smooth(g, 1.0, 1.0, 0.0), smooth(g, 0.5, 2.0, 0.4)};
    DecomposableForcing eta;
    eta.data.factors = {smooth(g, 1.0, 0.5, 0.2), smooth(g, 0.3, 1.5, 1.0)};
    eta.profile = [](double t) { return std::cos(t); };
    DecompositionOptions opt;
    auto dec = decompose_solution(p.model, x0, eta, cfg.structural_nu, cfg.structural_horizon * p.model.tau, opt);
    out.rows.push_back({g.h(), d, dec.max_residual, dec.max_relative_residual});
    hs.push_back(g.h());
    errs.push_back(dec.max_residual);
  }
  out.order = fitted_order(hs, errs);
  return out;
}

std::vector<OracleRow> oracle_battery(const RunConfig& cfg) {
  std::vector<OracleRow> rows;
  Preset pr = build_model(cfg);
  const auto& model = pr.model;
  const int N = cfg.oracle_grid_n;
  Grid g{model.tau, N};
  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto random_smooth = [&](const Grid& gg) {
    double a = U(rng), b = U(rng), c = U(rng), d = 2.0 + U(rng);
    return embed_continuous([=](double t) { return a + b * std::cos(d * t) + c * std::sin(3.0 * t); }, gg);
  };
  auto guarded = [&](const std::string& name, double tol, const std::function<double(std::string&)>& f) {
    OracleRow r;
    r.check = name;
    r.tolerance = tol;
    try {
      r.measured = f(r.detail);
      r.pass = std::isfinite(r.measured) && r.measured <= tol;
    } catch (const std::exception& e) {
      r.measured = std::numeric_limits<double>::quiet_NaN();
      r.pass = false;
      r.detail = e.what();
    }
    rows.push_back(r);
  };

  guarded("gram_identity", 1e-5, [&](std::string&) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      HistoryElement v1 = random_smooth(g), v2 = random_smooth(g), w1 = random_smooth(g), w2 = random_smooth(g);
      cplx lhs = compound_inner(wedge({v1, v2}), wedge({w1, w2}));
      double rhs = 0.5 * (inner_product(v1, w1) * inner_product(v2, w2) - inner_product(v1, w2) * inner_product(v2, w1));
      double scale = std::max(std::abs(rhs), 0.5 * norm(v1) * norm(v2) * norm(w1) * norm(w2) * 1e-3);
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
  });

  guarded("semigroup_law", std::max(1e-6, 0.1 * g.h() * g.h()), [&](std::string&) {
    HistoryElement phi = random_smooth(g);
    HistoryElement a = semigroup_apply(model, phi, 2.0 * model.tau);
    HistoryElement b = semigroup_apply(model, semigroup_apply(model, phi, model.tau), model.tau);
    return norm(a - b) / std::max(norm(a), 1e-300);
  });

  if (model.n == 1 && cfg.m >= 2) {
    const int m = 2;
    double s_bound = -1.0;
    try {
      auto rep = build_spectrum_report(characteristic_roots(model, cfg.region), m, cfg.region, cfg.window, 0.0,
                                       cfg.nu0_floor);
      s_bound = rep.bound.effective();
    } catch (const std::exception&) {
    }
    if (!std::isfinite(s_bound)) s_bound = cfg.window.re_min;
    const cplx p(-0.05 > s_bound + 0.05 ? -0.05 : s_bound + 0.1, 1.0);
    const double T = std::max(120.0, 30.0 / (p.real() - s_bound));
    double err_c = 0.0;
    guarded("laplace_vs_dense", 0.02 * std::max(1.0, 100.0 / N), [&](std::string& detail) {
      std::vector<double> errs;
      for (int NN : {N, 2 * N}) {
        Grid gg{model.tau, NN};
        WedgeSum w{{1.0, {smooth(gg, 1.0, 1.0, 0.0), smooth(gg, 0.5, 2.0, 0.4)}}};
        auto lap = resolvent_laplace(model, w, p, T, s_bound);
        auto den = dense_resolvent_solve(model, to_grid(w), p);
        CompoundGridFunction diff = lap.value + den.value;
        errs.push_back(compound_norm(diff) / compound_norm(den.value));
      }
      detail = "N=" + std::to_string(N) + ": " + g17(errs[0]) + ", N=" + std::to_string(2 * N) + ": " + g17(errs[1]);
      err_c = errs[1] <= errs[0] ? 0.0 : 1.0;
      return errs[0];
    });
    rows.push_back({"laplace_vs_dense_trend", err_c, 0.0, err_c == 0.0, "finer grid error does not exceed coarse"});

    guarded("generator_leibniz", 10.0 * g.h() / model.tau, [&](std::string& detail) {
      HistoryElement f1 = smooth(g, 1.0, 1.0, 0.0), f2 = smooth(g, 0.5, 2.0, 0.4);
      auto deriv = [&](const HistoryElement& f, double a, double b, double c) {
        HistoryElement d(1, g);
        for (int i = 0; i <= N; ++i) {
          double t = g.node(i);
          d.body(0, i) = -a * b * std::sin(b * t) + c * std::cos(t + 0.3);
        }
        d.head = stieltjes_apply(model.alpha, f);
        return d;
      };
      HistoryElement a1 = deriv(f1, 1.0, 1.0, 0.0), a2 = deriv(f2, 0.5, 2.0, 0.4);
      CompoundGridFunction phi = tensor({f1, f2});
      if (cfg.oracle_break_trace) {
        detail = "trace coupling deliberately broken";
        auto& top = phi.faces[3];
        for (int i = 0; i <= N; ++i) top(static_cast<size_t>(i) * (N + 1) + N, 0) += 0.1;
      }
      auto gen = assemble_generator(model.alpha, g, m);
      auto got = gen.gather(compound_generator_apply(gen, phi));
      auto want = gen.gather(tensor({a1, f2}) + tensor({f1, a2}));
      return (got - want).cwiseAbs().maxCoeff() / std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    });
  }

  if (model.n == 1) {
    OracleRow r{"structural_cauchy_order", 0.0, 0.9, false, ""};
    try {
      RunConfig c = cfg;
      c.structural_divisors = {N, 2 * N};
      auto so = structural_pipeline(c);
      r.measured = so.order;
      r.pass = so.order >= 0.9;
      r.detail = "fitted order, minimum 0.9; residuals " + g17(so.rows[0].residual) + ", " + g17(so.rows[1].residual);
    } catch (const std::exception& e) {
      r.measured = std::numeric_limits<double>::quiet_NaN();
      r.detail = e.what();
    }
    rows.push_back(r);
  }
  return rows;
}

int run_spectrum(const RunConfig& cfg, const OutputOptions& out, std::ostream& log) {
  auto s = spectrum_pipeline(cfg);
  json j = spectrum_json(s);
  j["localization"] = localization_json(s.preset);
  write_json(out, "spectrum.json", j);
  write_csv(out, "spectrum.csv", spectrum_csv(s.report));
  log << "model " << s.preset.model.name << ", " << s.report.base_roots.size() << " base roots, "
      << s.report.eigenvalues.size() << " compound eigenvalues (m = " << cfg.m << ")\n";
  log << "s_antisym = " << g17(s.report.bound.s_antisym) << ", s_tensor = " << g17(s.report.bound.s_tensor) << "\n";
  log << "nu0 = " << g17(s.report.nu0) << (s.report.nu0_auto ? " (auto)" : "") << "\n";
  for (const auto& n : s.report.notes) log << "note: " << n << "\n";
  for (const auto& n : s.notes) log << "note: " << n << "\n";
  return 0;
}

namespace {

json sweep_json(const SweepReport& r) {
  return {{"verdict", to_string(r.verdict)},
          {"sup", r.sup},
          {"omega_at_sup", r.omega_at_sup},
          {"threshold", num_or_null(r.threshold)},
          {"margin", num_or_null(r.margin)},
          {"lipschitz", r.lipschitz},
          {"d_omega", r.d_omega},
          {"omega_max", r.omega.empty() ? 0.0 : r.omega.back()},
          {"nodes", r.omega.size()},
          {"failures", r.failures},
          {"max_remainder", r.max_remainder},
          {"tail_ratio", r.tail_ratio},
          {"tail_oscillations", r.tail_oscillations},
          {"window_limited", r.window_limited},
          {"refinements", r.refinements},
          {"seconds", r.seconds},
          {"jobs", r.jobs},
          {"notes", r.notes}};
}

}  // namespace

int run_verify(const RunConfig& cfg, const OutputOptions& out, std::ostream& log) {
  auto v = verify_pipeline(cfg);
  json j;
  j["header"] = v.header;
  j["localization"] = localization_json(v.spectrum.preset);
  j["spectrum"] = spectrum_json(v.spectrum);
  j["sweep"] = sweep_json(v.report);
  j["conclusions"] = v.conclusions;
  j["exit_code"] = v.exit_code;
  write_json(out, "verify.json", j);
  write_csv(out, "sweep.csv", sweep_csv(v.report));
  for (const auto& h : v.header) log << h << "\n";
  log << "verdict: " << to_string(v.report.verdict) << "\n";
  for (const auto& c : v.conclusions) log << c << "\n";
  for (const auto& n : v.report.notes) log << "note: " << n << "\n";
  return v.exit_code;
}

int run_sweep(const RunConfig& cfg, const OutputOptions& out, std::ostream& log) {
  auto v = verify_pipeline(cfg);
  json j = sweep_json(v.report);
  j["header"] = v.header;
  write_json(out, "sweep.json", j);
  write_csv(out, "sweep.csv", sweep_csv(v.report));
  log << "sup alpha = " << g17(v.report.sup) << " at omega = " << g17(v.report.omega_at_sup) << ", "
      << v.report.omega.size() << " nodes\n";
  return 0;
}

int run_simulate(const RunConfig& cfg, const OutputOptions& out, std::ostream& log) {
  Preset p = build_model(cfg);
  const auto& model = p.model;
  Grid g{model.tau, cfg.grid_n};
  HistoryElement phi(model.n, g);
  for (int c = 0; c < model.n; ++c) {
    for (int i = 0; i <= g.N; ++i)
      phi.body(c, i) = cfg.sim_initial == "cos" ? cfg.sim_value * std::cos(g.node(i)) : cfg.sim_value;
    phi.head(c) = cfg.sim_value;
  }
  const bool with_gain = cfg.sim_with_gain && static_cast<bool>(model.gain);
  auto tr = solve_linear(model, phi, cfg.sim_t_end, cfg.dt.value_or(g.h()), with_gain);
  std::string s = "t";
  for (int c = 0; c < model.n; ++c) s += ",x" + std::to_string(c + 1);
  s += "\n";
  for (int k = 0; k <= tr.steps; ++k) {
    s += g17(k * g.h());
    auto x = tr.value(k);
    for (int c = 0; c < model.n; ++c) s += "," + g17(x(c));
    s += "\n";
  }
  write_csv(out, "trajectory.csv", s);
  Eigen::VectorXd last = tr.value(tr.steps);
  write_json(out, "simulate.json",
             {{"model", model.name}, {"t_end", tr.t_end()}, {"steps", tr.steps}, {"with_gain", with_gain},
              {"final", std::vector<double>(last.data(), last.data() + model.n)}});
  log << "simulated " << model.name << " to t = " << g17(tr.t_end()) << " (" << tr.steps << " steps)\n";
  return 0;
}

int run_structural(const RunConfig& cfg, const OutputOptions& out, std::ostream& log) {
  auto so = structural_pipeline(cfg);
  std::string s = "h,n,residual,relative_residual\n";
  json rows = json::array();
  for (const auto& r : so.rows) {
    s += g17(r.h) + "," + std::to_string(r.n) + "," + g17(r.residual) + "," + g17(r.relative_residual) + "\n";
    rows.push_back({{"h", r.h}, {"n", r.n}, {"residual", r.residual}, {"relative_residual", r.relative_residual}});
    log << "h = " << g17(r.h) << ": residual " << g17(r.residual) << "\n";
  }
  write_csv(out, "structural.csv", s);
  write_json(out, "structural.json", {{"rows", rows}, {"fitted_order", so.order}, {"nu", cfg.structural_nu}});
  log << "fitted order " << g17(so.order) << "\n";
  return so.order >= 0.9 ? 0 : 1;
}

int run_oracle(const RunConfig& cfg, const OutputOptions& out, std::ostream& log) {
  auto rows = oracle_battery(cfg);
  std::string s = "check,measured,tolerance,pass\n";
  json a = json::array();
  bool all = true;
  for (const auto& r : rows) {
    all = all && r.pass;
    s += r.check + "," + g17(r.measured) + "," + g17(r.tolerance) + "," + (r.pass ? "1" : "0") + "\n";
    a.push_back({{"check", r.check},
                 {"measured", num_or_null(r.measured)},
                 {"tolerance", r.tolerance},
                 {"pass", r.pass},
                 {"detail", r.detail}});
    log << (r.pass ? "PASS " : "FAIL ") << r.check << " measured " << g17(r.measured) << " tolerance "
        << g17(r.tolerance) << (r.detail.empty() ? "" : " (" + r.detail + ")") << "\n";
  }
  write_csv(out, "oracle.csv", s);
  write_json(out, "oracle.json", {{"checks", a}, {"all_pass", all}});
  return all ? 0 : 1;
}

int list_models(std::ostream& log) {
  for (const auto& name : preset_names()) {
    RunConfig d = parse_config("{\"model\": {\"preset\": \"" + name + "\"}}");
    log << name;
    for (const auto& [k, v] : d.model.params) log << " " << k << "=" << g17(v);
    log << "\n";
  }
  log << "raw (kernels given in the config file)\n";
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Compound-operator frequency verification for linear delay equations"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int jobs = -1;
  bool csv = false, js = false;
  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::NonNegativeNumber);
  app.add_flag("--csv", csv, "write CSV output only (combine with --json for both)");
  app.add_flag("--json", js, "write JSON output only (combine with --csv for both)");
  app.fallthrough();

  auto* sp = app.add_subcommand("spectrum", "characteristic roots and compound spectrum");
  auto* vf = app.add_subcommand("verify", "full pipeline with verdict");
  auto* sw = app.add_subcommand("sweep", "alpha_N over the frequency window");
  auto* sm = app.add_subcommand("simulate", "trajectory dump");
  auto* sc = app.add_subcommand("structural-check", "structural Cauchy residual against h");
  auto* orc = app.add_subcommand("oracle", "cross-route test battery");
  auto* md = app.add_subcommand("models", "preset registry");
  std::string models_cmd;
  md->add_option("action", models_cmd, "list")->required()->check(CLI::IsMember({"list"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (md->parsed()) return list_models(std::cout);
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (jobs >= 0) cfg.jobs = jobs;
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
    OutputOptions out;
    out.dir = out_dir.empty() ? cfg.out_dir : out_dir;
    if (csv || js) {
      out.csv = csv;
      out.json = js;
    }
    if (sp->parsed()) return run_spectrum(cfg, out, std::cout);
    if (vf->parsed()) return run_verify(cfg, out, std::cout);
    if (sw->parsed()) return run_sweep(cfg, out, std::cout);
    if (sm->parsed()) return run_simulate(cfg, out, std::cout);
    if (sc->parsed()) return run_structural(cfg, out, std::cout);
    if (orc->parsed()) return run_oracle(cfg, out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace dcomp
