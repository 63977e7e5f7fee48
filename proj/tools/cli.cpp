#include "legfol/cli.hpp"

#include "legfol/acs_io.hpp"
#include "legfol/campaigns.hpp"
#include "legfol/scenarios.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace legfol::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out;
  std::optional<unsigned> seed;
  std::optional<int> grid;
  std::optional<double> tol;
  std::optional<double> r;
  std::optional<int> samples;
  std::string scenario;
};

json load_config(const Options& o) {
  if (o.config.empty()) return json::object();
  std::ifstream is(o.config);
  if (!is) throw UsageError("cannot open config '" + o.config + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw UsageError("config '" + o.config + "' is not valid JSON: " + e.what());
  }
}

// Config parsing failures are usage errors.
template <class F>
auto parse_field(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad '") + what + "': " + e.what());
  } catch (const DomainError& e) {
    throw UsageError(std::string("bad '") + what + "': " + e.what());
  }
}

ACSField field_of(const json& cfg) {
  return parse_field("acs", [&] { return acs_from_json(cfg.value("acs", json{{"builtin", "standard"}})); });
}

Point5 point_of(const json& j) {
  if (!j.is_array() || j.size() != 5) throw DomainError("expected an array of 5 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>(), j[4].get<double>()};
}

cplx cplx_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw DomainError("expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

unsigned seed_of(const Options& o, const json& cfg, unsigned fallback) {
  if (o.seed) return *o.seed;
  return parse_field("seed", [&] { return cfg.value("seed", fallback); });
}

SolverConfig solver_of(const Options& o, const json& cfg, SolverConfig s) {
  parse_field("solver", [&] {
    const json j = cfg.value("solver", json::object());
    s.n = j.value("n", s.n);
    s.radius = j.value("radius", s.radius);
    s.tol = j.value("tol", s.tol);
    s.max_iter = j.value("max_iter", s.max_iter);
    s.enforce_smallness = j.value("enforce_smallness", s.enforce_smallness);
    s.smallness_samples = j.value("smallness_samples", s.smallness_samples);
    return 0;
  });
  if (o.grid) s.n = *o.grid;
  if (o.tol) s.tol = *o.tol;
  if (s.n < 17 || s.n % 2 == 0) throw UsageError("grid n must be odd and at least 17");
  return s;
}

LeafKind kind_of(const json& j) {
  const std::string k = parse_field("kind", [&] { return j.value("kind", std::string("polar")); });
  if (k == "polar") return LeafKind::Polar;
  if (k == "parallel") return LeafKind::Parallel;
  throw UsageError("kind must be 'polar' or 'parallel'");
}

// Explicit r, else the dilation chosen by the smallness test.
std::pair<double, json> dilation_of(const Options& o, const json& cfg, const ACSField& field, SolverConfig s) {
  if (o.r) return {*o.r, json{{"source", "flag"}}};
  if (cfg.contains("r")) return {parse_field("r", [&] { return cfg["r"].get<double>(); }), json{{"source", "config"}}};
  s.radius = 1.0;
  const DilationChoice d = choose_dilation(field, s);
  json j = d.to_json();
  j["source"] = "choose_dilation";
  return {d.r, j};
}

json grid_json(const SolverConfig& s) {
  return {{"n", s.n}, {"R", s.radius}, {"h", Grid::make(s.n, s.radius)->h()}};
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  os << j.dump(2) << '\n';
  if (!os) throw Error("cannot write " + p.string());
}

// Writes the report (and reports the destination) or prints it.
void emit(const Options& o, const json& report, const std::string& name, std::ostream& out) {
  if (o.out.empty()) {
    out << report.dump(2) << '\n';
    return;
  }
  fs::create_directories(o.out);
  write_json(fs::path(o.out) / name, report);
  out << (fs::path(o.out) / name).string() << '\n';
}

void require_r(double r) {
  if (!(r > 0.0) || r > 1.0) throw UsageError("r must lie in (0, 1]");
}

int cmd_acs_check(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.config.empty()) throw UsageError("acs-check needs --config");
  const json cfg = load_config(o);
  const ACSField field =
      parse_field("acs", [&] { return acs_from_json(cfg.contains("acs") ? cfg["acs"] : cfg); });
  const int samples = o.samples.value_or(10000);
  const unsigned seed = seed_of(o, cfg, 1);
  const double r = o.r.value_or(1.0);
  require_r(r);
  json report{{"command", "acs-check"}, {"samples", samples}, {"seed", seed}, {"r", r}};
  int code = kPass;
  try {
    const acs::IdentityReport id = acs::check_identities(field, samples, seed);
    report["identities"] = id.to_json();
    report["tol"] = id.tolerance;
    report["epsilon"] = acs::epsilon_estimate(field, r, std::min(samples, 500), seed);
    if (!id.pass) {
      err << "identity failure: " << id.failure() << '\n';
      code = kFailure;
    }
  } catch (const Error& e) {
    report["error"] = e.what();
    err << e.what() << '\n';
    code = kFailure;
  }
  report["pass"] = code == kPass;
  emit(o, report, "acs_check.json", out);
  return code;
}

int cmd_solve_disk(const Options& o, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(o);
  const ACSField field = field_of(cfg);
  SolverConfig s = solver_of(o, cfg, SolverConfig{});
  s.seed = seed_of(o, cfg, s.seed);
  const Point5 P = parse_field("P", [&] { return cfg.contains("P") ? point_of(cfg["P"]) : Point5{}; });
  const PlaneChart X(parse_field("X", [&] { return cfg.contains("X") ? cplx_of(cfg["X"]) : cplx(0.0); }));
  const bool through = parse_field("through", [&] { return cfg.value("through", true); });

  json report{{"command", "solve-disk"}, {"grid", grid_json(s)}, {"tol", s.tol}, {"solver", s.to_json()}};
  int code = kPass;
  try {
    const auto [r, dil] = dilation_of(o, cfg, field, s);
    require_r(r);
    report["r"] = r;
    report["dilation"] = dil;
    report["epsilon"] = acs::epsilon_estimate(field, r, s.smallness_samples, s.seed);
    const ACSField D = acs::dilated(field, r);
    const ContactParams params(r);
    DiskSolution sol;
    if (through) {
      PsiInverse inv = psi_invert(P, X, D, s, params);
      report["psi_invert"] = {{"P", {inv.P.x1, inv.P.y1, inv.P.x2, inv.P.y2, inv.P.t}},
                              {"X", {inv.X.w.real(), inv.X.w.imag()}},
                              {"iterations", inv.iterations},
                              {"final_increment", inv.final_increment}};
      sol = std::move(inv.solution);
    } else {
      sol = picard_solve(P, X, D, s, params);
    }
    report["solution"] = sol.to_json();
    if (!o.out.empty()) {
      fs::create_directories(o.out);
      std::ofstream fos(fs::path(o.out) / "f.csv");
      sol.f.write_csv(fos, "f");
      std::ofstream tos(fs::path(o.out) / "t.csv");
      sol.t.write_csv(tos, "t");
      std::ofstream pos(fs::path(o.out) / "patch.csv");
      sol.patch.write_csv(pos);
    }
  } catch (const Error& e) {
    report["error"] = e.what();
    err << e.what() << '\n';
    code = kFailure;
  }
  report["pass"] = code == kPass;
  emit(o, report, "diagnostics.json", out);
  return code;
}

struct FoliationSetup {
  ACSField field;  // dilated
  FoliationConfig fc;
  json header;
};

FoliationSetup foliation_setup(const Options& o, const json& cfg, const char* command) {
  const ACSField raw = field_of(cfg);
  FoliationConfig fc;
  fc.solver = solver_of(o, cfg, fc.solver);
  fc.solver.seed = seed_of(o, cfg, fc.solver.seed);
  parse_field("foliation", [&] {
    fc.t_nodes = cfg.value("t_nodes", fc.t_nodes);
    fc.t_min = cfg.value("t_min", fc.t_min);
    fc.t_max = cfg.value("t_max", fc.t_max);
    fc.lookup_tol = cfg.value("lookup_tol", fc.lookup_tol);
    return 0;
  });
  SolverConfig probe = fc.solver;
  probe.radius = 1.0;
  const auto [r, dil] = dilation_of(o, cfg, raw, probe);
  require_r(r);
  fc.params = ContactParams(r);
  json header{{"command", command},
              {"r", r},
              {"dilation", dil},
              {"epsilon", acs::epsilon_estimate(raw, r, fc.solver.smallness_samples, fc.solver.seed)},
              {"grid", grid_json(fc.solver)},
              {"tol", fc.lookup_tol},
              {"foliation", fc.to_json()},
              {"coordinates", "dilated"}};
  return {acs::dilated(raw, r), fc, header};
}

int cmd_foliate(const Options& o, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(o);
  const LeafKind kind = kind_of(cfg);
  const PlaneChart X(parse_field("X", [&] { return cfg.contains("X") ? cplx_of(cfg["X"]) : cplx(0.0); }));
  const cplx P = parse_field("P", [&] { return cfg.contains("P") ? cplx_of(cfg["P"]) : cplx(0.0); });
  int code = kPass;
  json report;
  try {
    FoliationSetup st = foliation_setup(o, cfg, "foliate");
    report = st.header;
    const Leaf leaf = kind == LeafKind::Polar ? build_polar_leaf(X, st.field, st.fc)
                                              : build_parallel_leaf(P, X, st.field, st.fc);
    report["leaf"] = leaf.manifest();
    if (!o.out.empty()) leaf.write(fs::path(o.out) / "leaf");
  } catch (const Error& e) {
    report["error"] = e.what();
    err << e.what() << '\n';
    code = kFailure;
  }
  report["pass"] = code == kPass;
  emit(o, report, "foliate.json", out);
  return code;
}

int cmd_leaf_of(const Options& o, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(o);
  const LeafKind kind = kind_of(cfg);
  const PlaneChart X(parse_field("X", [&] { return cfg.contains("X") ? cplx_of(cfg["X"]) : cplx(0.0); }));
  std::vector<Point5> points = parse_field("points", [&] {
    std::vector<Point5> v;
    for (const auto& p : cfg.value("points", json::array())) v.push_back(point_of(p));
    return v;
  });
  const int samples = o.samples.value_or(parse_field("samples", [&] { return cfg.value("samples", 0); }));
  if (points.empty() && samples <= 0) throw UsageError("leaf-of needs 'points' in the config or --samples");
  int code = kPass;
  json report;
  try {
    FoliationSetup st = foliation_setup(o, cfg, "leaf-of");
    report = st.header;
    const ComplexCoords cc(st.field);
    std::mt19937_64 rng(seed_of(o, cfg, 1));
    for (int k = 0; k < samples; ++k)
      points.push_back(kind == LeafKind::Polar ? sample_polar_region(rng, cc) : sample_parallel_region(rng, cc));
    const CoverageReport cov = coverage_campaign(kind, points, st.field, st.fc, X);
    report["coverage"] = cov.to_json();
    if (cov.failures > 0) {
      err << cov.failures << " of " << points.size() << " lookups failed\n";
      code = kFailure;
    }
  } catch (const Error& e) {
    report["error"] = e.what();
    err << e.what() << '\n';
    code = kFailure;
  }
  report["pass"] = code == kPass;
  emit(o, report, "leaf_of.json", out);
  return code;
}

int cmd_intersect(const Options& o, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(o);
  const int samples = o.samples.value_or(parse_field("samples", [&] { return cfg.value("samples", 0); }));
  const json lj = cfg.value("leaf", json::object());
  const json pj = cfg.value("patch", json::object());
  const LeafKind kind = kind_of(lj);
  const PlaneChart X(parse_field("leaf.X", [&] { return lj.contains("X") ? cplx_of(lj["X"]) : cplx(0.0); }));
  const cplx P = parse_field("leaf.P", [&] { return lj.contains("P") ? cplx_of(lj["P"]) : cplx(0.0); });
  if (samples <= 0 && !pj.contains("Q")) throw UsageError("intersect needs patch.Q in the config or --samples");
  const Point5 Q = parse_field("patch.Q", [&] { return pj.contains("Q") ? point_of(pj["Q"]) : Point5{}; });
  const PlaneChart Y(parse_field("patch.Y", [&] { return pj.contains("Y") ? cplx_of(pj["Y"]) : cplx(1.0); }));
  int code = kPass;
  json report;
  try {
    FoliationSetup st = foliation_setup(o, cfg, "intersect");
    report = st.header;
    if (samples > 0) {
      const PositivityReport pos = positivity_campaign(st.field, st.fc, samples, seed_of(o, cfg, 1));
      report["campaign"] = pos.to_json();
      if (pos.negative > 0) {
        err << pos.negative << " negative intersections\n";
        code = kFailure;
      }
    } else {
      const Leaf leaf = kind == LeafKind::Polar ? build_polar_leaf(X, st.field, st.fc)
                                                : build_parallel_leaf(P, X, st.field, st.fc);
      const PsiInverse inv = psi_invert(Q, Y, st.field, st.fc.solver, st.fc.params, std::nullopt, st.fc.psi_tol);
      json recs = json::array();
      for (const auto& r : intersect(leaf, inv.solution.patch)) recs.push_back(r.to_json());
      report["intersections"] = recs;
    }
  } catch (const Error& e) {
    report["error"] = e.what();
    err << e.what() << '\n';
    code = kFailure;
  }
  report["pass"] = code == kPass;
  emit(o, report, "intersect.json", out);
  return code;
}

int cmd_verify_scenario(const Options& o, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(o);
  std::string name = o.scenario;
  if (name.empty()) name = parse_field("scenario", [&] { return cfg.value("scenario", std::string()); });
  if (name.empty()) throw UsageError("verify-scenario needs --scenario or 'scenario' in the config");
  ScenarioId id;
  try {
    id = scenario_from_string(name);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const int n = o.samples.value_or(parse_field("n_points", [&] { return cfg.value("n_points", 100); }));
  if (n < 1) throw UsageError("number of points must be positive");
  const unsigned seed = seed_of(o, cfg, 1);
  json report;
  int code = kPass;
  try {
    const ScenarioReport rep = verify_scenario(id, n, seed);
    report = rep.to_json();
    report["command"] = "verify-scenario";
    report["tol"] = 1e-8;
    if (!rep.pass) {
      err << "scenario checks failed\n";
      code = kFailure;
    }
  } catch (const Error& e) {
    report = {{"command", "verify-scenario"}, {"error", e.what()}, {"pass", false}};
    err << e.what() << '\n';
    code = kFailure;
  }
  emit(o, report, "scenario.json", out);
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Legendrian foliations of almost complex contact structures on R^5"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--grid", o.grid, "grid nodes per side (odd)");
    sub->add_option("--tol", o.tol, "solver tolerance");
    sub->add_option("--r", o.r, "dilation factor in (0, 1]");
    sub->add_option("--samples", o.samples, "number of samples");
  };
  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const Options&, std::ostream&, std::ostream&);
  };
  const Cmd cmds[] = {
      {"acs-check", "check the algebraic identities of an almost complex structure", cmd_acs_check},
      {"solve-disk", "solve for the Legendrian J-holomorphic disk through a point", cmd_solve_disk},
      {"foliate", "build a polar or parallel leaf", cmd_foliate},
      {"leaf-of", "find the leaf through given or random points", cmd_leaf_of},
      {"intersect", "intersect a leaf with a disk, or run a sign campaign", cmd_intersect},
      {"verify-scenario", "pointwise checks of the s5, cy and n5 examples", cmd_verify_scenario},
  };
  std::vector<std::pair<CLI::App*, const Cmd*>> subs;
  for (const auto& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    common(sub);
    if (std::string(c.name) == "verify-scenario") sub->add_option("--scenario", o.scenario, "s5, cy or n5");
    subs.emplace_back(sub, &c);
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kPass;
    }
    err << e.what() << '\n';
    return kUsage;
  }
  try {
    for (const auto& [sub, cmd] : subs)
      if (sub->parsed()) return cmd->fn(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace legfol::cli
