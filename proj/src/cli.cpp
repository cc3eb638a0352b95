#include "roughstep/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "roughstep/analysis.hpp"
#include "roughstep/chain_curve.hpp"
#include "roughstep/drivers.hpp"
#include "roughstep/explosion_driver.hpp"
#include "roughstep/schemes.hpp"

namespace roughstep::cli {

using io::json;

namespace {

// Reads one JSON object, echoing every value (defaults included) into `out`
// and rejecting keys nobody asked for.
class Block {
 public:
  Block(const json& src, json& out, std::string where) : src_(src), out_(out), where_(std::move(where)) {
    if (!src_.is_object()) throw ContractError(where_ + ": expected an object");
    out_ = json::object();
  }

  bool has(const std::string& key) const { return src_.contains(key); }

  template <class T>
  T get(const std::string& key, T def) {
    seen_.insert(key);
    T value = src_.contains(key) ? convert<T>(key) : std::move(def);
    out_[key] = value;
    return value;
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!src_.contains(key)) throw ContractError(where_ + ": missing key '" + key + "'");
    T value = convert<T>(key);
    out_[key] = value;
    return value;
  }

  /// Raw JSON value, echoed verbatim.
  json raw(const std::string& key) {
    seen_.insert(key);
    if (!src_.contains(key)) throw ContractError(where_ + ": missing key '" + key + "'");
    out_[key] = src_.at(key);
    return src_.at(key);
  }

  void echo(const std::string& key, json value) {
    seen_.insert(key);
    out_[key] = std::move(value);
  }

  Block child(const std::string& key, bool required = true) {
    seen_.insert(key);
    static const json empty = json::object();
    if (!src_.contains(key) && required) throw ContractError(where_ + ": missing block '" + key + "'");
    return Block(src_.contains(key) ? src_.at(key) : empty, out_[key], where_ + "." + key);
  }

  void close() const {
    for (const auto& [key, value] : src_.items()) {
      if (!seen_.count(key)) throw ContractError(where_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  template <class T>
  T convert(const std::string& key) const {
    try {
      return src_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ContractError(where_ + "." + key + ": wrong type");
    }
  }

  const json& src_;
  json& out_;
  std::string where_;
  std::set<std::string> seen_;
};

Mat matrix(const json& j, const std::string& where) {
  try {
    return io::mat_from_json(j);
  } catch (const ContractError& e) {
    throw ContractError(where + ": " + e.what());
  }
}

struct Context {
  std::string command;
  json resolved = json::object();
  std::optional<std::uint64_t> seed;
  Artifacts files;

  std::uint64_t need_seed(const std::string& why) const {
    if (!seed) throw ContractError("seed is mandatory for " + why);
    return *seed;
  }

  // Reports carry the config echo, seed and input hash.
  void report(const std::string& name, json body) {
    body["config"] = resolved;
    body["seed"] = seed ? json(*seed) : json(nullptr);
    body["input_hash"] = io::content_hash(io::dump(resolved));
    files[name] = io::dump(body);
  }
};

struct Driver {
  DriverPath path;
  std::optional<AreaProcess> area;
};

Driver brownian_driver(Block& b, Context& ctx) {
  BrownianConfig cfg;
  cfg.d = b.get<std::size_t>("d", 1);
  cfg.T = b.get<double>("T", 1.0);
  cfg.levels = b.get<int>("levels", 10);
  cfg.substeps = b.get<int>("substeps", 16);
  const auto area = b.get<std::string>("area", "ito");
  cfg.seed = ctx.need_seed("the brownian driver");
  cfg.validate();
  DriverPath path = brownian_path(cfg);
  if (area == "none") return Driver{std::move(path), std::nullopt};
  AreaProcess ito = ito_area(path, cfg);
  if (area == "ito") return Driver{std::move(path), std::move(ito)};
  if (area == "stratonovich") return Driver{std::move(path), stratonovich_area(ito)};
  throw ContractError(b.where() + ".area: expected ito, stratonovich or none");
}

Driver polynomial_driver(Block& b) {
  const auto coeffs = b.require<std::vector<std::vector<double>>>("coeffs");
  const double T = b.get<double>("T", 1.0);
  const auto steps = b.get<std::size_t>("steps", 256);
  const auto area = b.get<std::string>("area", "analytic");
  PolynomialPath poly(coeffs);
  const Partition grid = Partition::uniform(0.0, T, steps);
  DriverPath path = poly.sample(grid);
  if (area == "none") return Driver{std::move(path), std::nullopt};
  if (area == "analytic") return Driver{path, analytic_area(poly, grid)};
  if (area == "degenerate") return Driver{path, degenerate_area(path)};
  throw ContractError(b.where() + ".area: expected analytic, degenerate or none");
}

Driver build_driver(Block& b, Context& ctx) {
  const auto type = b.require<std::string>("type");
  Driver out = [&] {
    if (type == "brownian") return brownian_driver(b, ctx);
    if (type == "polynomial") return polynomial_driver(b);
    throw ContractError(b.where() + ".type: expected brownian or polynomial");
  }();
  b.close();
  return out;
}

VectorField build_field(Block& b, std::size_t d) {
  const auto type = b.require<std::string>("type");
  const double gamma = b.get<double>("gamma", 3.0);
  VectorField f = [&] {
    if (type == "zero") return fields::zero(b.require<std::size_t>("n"), d);
    if (type == "constant") return fields::constant(matrix(b.raw("value"), b.where() + ".value"));
    if (type == "linear") {
      std::vector<Mat> ms;
      const json mats = b.raw("matrices");
      if (!mats.is_array()) throw ContractError(b.where() + ".matrices: expected an array");
      for (const auto& m : mats) ms.push_back(matrix(m, b.where() + ".matrices"));
      Mat offsets;
      if (b.has("offsets")) offsets = matrix(b.raw("offsets"), b.where() + ".offsets");
      return fields::linear(std::move(ms), offsets);
    }
    throw ContractError(b.where() + ".type: expected zero, constant or linear");
  }();
  b.close();
  if (f.d() != d) throw ContractError(b.where() + ": field expects d = " + std::to_string(f.d()));
  return VectorField(f.n(), f.d(), [f](const Vec& y) { return f(y); },
                     [f](const Vec& y) { return f.jacobians(y); }, [f](const Vec& y) { return f.hessians(y); },
                     gamma);
}

Vec initial_state(Block& b, std::size_t n) {
  const auto y0 = b.require<std::vector<double>>("y0");
  if (y0.size() != n) throw ContractError(b.where() + ".y0: expected " + std::to_string(n) + " entries");
  return Eigen::Map<const Vec>(y0.data(), static_cast<Eigen::Index>(y0.size()));
}

SchemeKind scheme_kind(const std::string& name, const std::string& where) {
  if (name == "euler") return SchemeKind::Euler;
  if (name == "corrected") return SchemeKind::Corrected;
  throw ContractError(where + ".kind: expected euler or corrected");
}

// ---------------------------------------------------------------- commands

void cmd_solve(const json& cfg, Context& ctx) {
  Block root(cfg, ctx.resolved, "config");
  Block drv = root.child("driver");
  const Driver driver = build_driver(drv, ctx);
  Block sch = root.child("scheme");
  const SchemeKind kind = scheme_kind(sch.get<std::string>("kind", "euler"), sch.where());
  SchemeConfig scfg;
  scfg.scheme = kind;
  scfg.threshold = sch.get<double>("threshold", 1e6);
  const bool allow_explosion = sch.get<bool>("allow_explosion", false);
  Block fb = sch.child("field");
  const VectorField f = build_field(fb, driver.path.dim());
  const Vec y0 = initial_state(sch, f.n());
  sch.close();
  Block an = root.child("analysis", false);
  const auto window = an.get<std::size_t>("defect_window", 0);
  const double p = an.get<double>("p", driver.path.p());
  const double gamma = an.get<double>("gamma", f.gamma());
  const bool rows = an.get<bool>("defect_rows", false);
  an.close();
  root.echo("seed", ctx.seed ? json(*ctx.seed) : json(nullptr));
  root.close();
  if (kind == SchemeKind::Corrected && !driver.area) throw ContractError("corrected scheme needs a driver area");

  const Trajectory traj = kind == SchemeKind::Euler
                              ? euler_solve(f, driver.path, driver.path.grid(), y0, scfg)
                              : corrected_solve(f, driver.path, *driver.area, driver.path.grid(), y0, scfg);
  if (traj.exploded_at && !allow_explosion) {
    throw NumericalError("trajectory exceeded the threshold at t = " + std::to_string(traj.time(*traj.exploded_at)));
  }
  ctx.files["trajectory.csv"] = io::trajectory_csv(traj);
  if (window > 0) {
    if (traj.exploded_at) throw NumericalError("defect report needs a complete trajectory");
    const ControlModulus omega = driver.area ? control_fit(driver.path, *driver.area, p) : control_fit(driver.path, p);
    const AreaProcess* area = kind == SchemeKind::Corrected ? &*driver.area : nullptr;
    const DefectReport rep = defect(traj, f, driver.path, area, window_pairs(traj.partition.steps(), window), omega,
                                    gamma, p);
    json body = io::defect_to_json(rep, rows);
    body["omega_constant"] = io::number(omega.constant());
    ctx.report("defect.json", std::move(body));
  }
}

void cmd_convergence(const json& cfg, Context& ctx) {
  Block root(cfg, ctx.resolved, "config");
  Block drv = root.child("driver");
  const Driver driver = build_driver(drv, ctx);
  Block an = root.child("analysis");
  const auto oracle_name = an.get<std::string>("oracle", "gbm_ito");
  const auto lo = an.get<int>("k_min_level", 4);
  const auto hi = an.get<int>("k_max_level", 12);
  const auto drop = an.get<std::size_t>("drop", 2);
  an.close();
  Block sch = root.child("scheme");
  const SchemeKind kind = scheme_kind(sch.get<std::string>("kind", "euler"), sch.where());
  const bool gbm = oracle_name == "gbm_ito" || oracle_name == "gbm_stratonovich";
  if (gbm && sch.has("field")) throw ContractError("config.scheme.field: gbm oracles fix f(y) = y");
  VectorField f = fields::linear({Mat::Identity(1, 1)});
  if (!gbm) {
    Block fb = sch.child("field");
    f = build_field(fb, driver.path.dim());
  }
  const Vec y0 = initial_state(sch, f.n());
  sch.close();
  root.echo("seed", ctx.seed ? json(*ctx.seed) : json(nullptr));
  root.close();

  if (lo < 0 || hi < lo || hi > 24) throw ContractError("config.analysis: invalid K level range");
  std::vector<std::size_t> K;
  for (int l = lo; l <= hi; ++l) K.push_back(std::size_t{1} << l);
  Oracle oracle = [&] {
    if (oracle_name == "gbm_ito") return oracles::gbm_ito(driver.path, y0[0]);
    if (oracle_name == "gbm_stratonovich") return oracles::gbm_stratonovich(driver.path, y0[0]);
    if (oracle_name == "fine_corrected") {
      if (!driver.area) throw ContractError("fine_corrected oracle needs a driver area");
      return oracles::fine_corrected(f, driver.path, *driver.area, y0);
    }
    throw ContractError("config.analysis.oracle: expected gbm_ito, gbm_stratonovich or fine_corrected");
  }();
  if (gbm && driver.path.dim() != 1) throw ContractError("gbm oracles need a scalar driver");
  ConvergenceProblem problem{f, driver.path, driver.area, y0};
  const RateReport rep = convergence_study(problem, kind, K, oracle, drop);
  ctx.report("rate.json", io::rate_to_json(rep));
}

void cmd_chen_check(const json& cfg, Context& ctx) {
  Block root(cfg, ctx.resolved, "config");
  Block drv = root.child("driver");
  const Driver driver = build_driver(drv, ctx);
  Block an = root.child("analysis", false);
  const auto triples = an.get<std::size_t>("triples", 1000);
  const double tol = an.get<double>("tolerance", 1e-12);
  const auto check_seed = an.get<std::uint64_t>("triple_seed", 1);
  an.close();
  root.echo("seed", ctx.seed ? json(*ctx.seed) : json(nullptr));
  root.close();
  if (!driver.area) throw ContractError("chen-check needs a driver area");
  const double residual = chen_consistency(*driver.area, triples, check_seed);
  ctx.report("chen.json", json{{"kind", to_string(driver.area->kind())},
                               {"triples", triples},
                               {"residual", io::number(residual)},
                               {"tolerance", tol},
                               {"pass", residual <= tol}});
}

void cmd_condition21(const json& cfg, Context& ctx) {
  Block root(cfg, ctx.resolved, "config");
  Block drv = root.child("driver");
  const Driver driver = build_driver(drv, ctx);
  Block an = root.child("analysis", false);
  const double alpha = an.get<double>("alpha", 0.45);
  const double beta = an.get<double>("beta", 0.55);
  const int level_min = an.get<int>("level_min", 4);
  const int top = static_cast<int>(std::lround(std::log2(static_cast<double>(driver.path.grid().steps()))));
  const int level_max = an.get<int>("level_max", top);
  const auto cap = an.get<std::size_t>("window_cap", 4096);
  an.close();
  root.echo("seed", ctx.seed ? json(*ctx.seed) : json(nullptr));
  root.close();
  if (!driver.area) throw ContractError("condition21 needs a driver area");
  const ConditionStat st = condition21_stat(*driver.area, alpha, beta, level_min, level_max, cap);
  if (!std::isfinite(st.value)) throw NumericalError("condition21 statistic is not finite");
  json body = io::condition_to_json(st);
  body["kind"] = to_string(driver.area->kind());
  ctx.report("condition21.json", std::move(body));
}

CounterexampleConfig counterexample_config(Block& b) {
  CounterexampleConfig c;
  c.p = b.get<double>("p", c.p);
  c.gamma = b.get<double>("gamma", c.gamma);
  c.beta_exp = b.get<double>("beta_exp", c.beta_exp);
  c.rho_exp = b.get<double>("rho_exp", c.rho_exp);
  c.tau = b.get<double>("tau", c.tau);
  c.t_max = b.get<double>("t_max", c.t_max);
  c.cycles = b.get<double>("cycles", c.cycles);
  c.points_per_cycle = b.get<int>("points_per_cycle", c.points_per_cycle);
  c.validate();
  return c;
}

void cmd_nonuniqueness(const json& cfg, Context& ctx) {
  Block root(cfg, ctx.resolved, "config");
  Block drv = root.child("driver", false);
  const CounterexampleConfig c = counterexample_config(drv);
  drv.close();
  Block an = root.child("analysis", false);
  const auto window = an.get<std::size_t>("window", 2);
  an.close();
  root.echo("seed", ctx.seed ? json(*ctx.seed) : json(nullptr));
  root.close();
  const NonuniquenessReport rep = nonuniqueness_demo(c, window);
  ctx.files["trajectory.csv"] = io::trajectory_csv(rep.traj_b);
  ctx.files["trajectory_zero.csv"] = io::trajectory_csv(rep.traj_a);
  ctx.report("defect.json", json{{"zero_solution", io::defect_to_json(rep.defect_a)},
                                 {"second_solution", io::defect_to_json(rep.defect_b)},
                                 {"omega_constant", io::number(rep.omega.constant())}});
  ctx.report("nonuniqueness.json", json{{"separation", io::number(rep.separation)},
                                        {"defect_scale", io::number(rep.defect_scale)},
                                        {"ratio", io::number(rep.separation / rep.defect_scale)},
                                        {"window", rep.window},
                                        {"t_min", c.t_min()},
                                        {"points", rep.traj_b.partition.size()}});
}

void cmd_explosion(const json& cfg, Context& ctx) {
  Block root(cfg, ctx.resolved, "config");
  Block drv = root.child("driver");
  const double p = drv.get<double>("p", 1.5);
  const double gamma = drv.get<double>("gamma", 1.8);
  Block env_b = drv.child("envelope", false);
  const double cD = env_b.get<double>("cD", 1.0);
  const double aD = env_b.get<double>("aD", 1.8);
  const double cA = env_b.get<double>("cA", 1.0);
  const double aA = env_b.get<double>("aA", 1.0);
  env_b.close();
  Block ob = drv.child("options", false);
  ExplosionOptions opts;
  opts.points_per_efold = ob.get<double>("points_per_efold", opts.points_per_efold);
  opts.y_max = ob.get<double>("y_max", opts.y_max);
  opts.r_factor = ob.get<double>("r_factor", opts.r_factor);
  opts.inf_points = ob.get<int>("inf_points", opts.inf_points);
  opts.inf_span = ob.get<double>("inf_span", opts.inf_span);
  opts.tail_points = ob.get<int>("tail_points", opts.tail_points);
  ob.close();
  drv.close();
  Block sch = root.child("scheme", false);
  SchemeConfig scfg;
  scfg.threshold = sch.get<double>("threshold", 1e6);
  sch.close();
  Block an = root.child("analysis", false);
  const double R_max = an.get<double>("R_max", 1e6);
  an.close();
  root.echo("seed", ctx.seed ? json(*ctx.seed) : json(nullptr));
  root.close();

  const GrowthEnvelope env = GrowthEnvelope::power_law(cD, aD, cA, aA, gamma - 1.0, p);
  const CriterionReport crit = explosion_criterion(env, p, gamma, R_max);
  const ExplosionDriver ex = explosion_driver(env, p, gamma, opts);
  // The solution y(t) on the driver grid, up to the first threshold crossing.
  Trajectory traj{ex.path.grid(), {}, std::nullopt, SchemeKind::Euler};
  for (std::size_t k = 0; k < ex.path.size(); ++k) {
    traj.states.push_back(Vec::Constant(1, ex.model->state_at(traj.time(k))));
    if (!(traj.states.back()[0] <= scfg.threshold)) {
      traj.exploded_at = k;
      break;
    }
  }
  double peak = 0.0;
  for (const auto& y : traj.states) peak = std::max(peak, y.norm());
  const Trajectory euler = euler_solve(ex.field, ex.path, ex.path.grid(), Vec::Ones(1), scfg);
  double euler_peak = 0.0;
  for (const auto& y : euler.states) euler_peak = std::max(euler_peak, y.norm());
  const ControlModulus omega = control_fit(ex.path, p);
  ctx.files["trajectory.csv"] = io::trajectory_csv(traj);
  ctx.report("explosion.json",
             json{{"t_star", ex.t_star},
                  {"exploded", traj.exploded_at.has_value()},
                  {"explosion_time", traj.exploded_at ? json(traj.time(*traj.exploded_at)) : json(nullptr)},
                  {"peak_state", io::number(peak)},
                  {"euler",
                   {{"exploded", euler.exploded_at.has_value()},
                    {"explosion_time", euler.exploded_at ? json(euler.time(*euler.exploded_at)) : json(nullptr)},
                    {"peak_state", io::number(euler_peak)}}},
                  {"control_constant", io::number(omega.constant())},
                  {"tail_exponent", ex.model->tail_exponent()},
                  {"criterion", io::criterion_to_json(crit)},
                  {"criterion_exponent", power_law_criterion_exponent(aA, aD, gamma - 1.0, p)}});
}

void cmd_curve(const json& cfg, Context& ctx) {
  Block root(cfg, ctx.resolved, "config");
  Block drv = root.child("driver", false);
  const double alpha = drv.get<double>("alpha", 0.7);
  const int depth = drv.get<int>("depth", 6);
  drv.close();
  Block an = root.child("analysis", false);
  const auto pairs = an.get<std::size_t>("pairs", 10000);
  const double min_gap = an.get<double>("min_gap", 0.0);
  const auto samples = an.get<std::size_t>("samples", 4096);
  an.close();
  root.echo("seed", ctx.seed ? json(*ctx.seed) : json(nullptr));
  root.close();
  if (samples < 2) throw ContractError("config.analysis.samples: need at least 2");

  const ChainCurve curve = holder_chain_curve(alpha, depth);
  const DriverPath sampled = curve.sample(samples);
  std::string csv = "t,u_1,u_2\n";
  char buf[96];
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sampled.grid()[k], sampled[k][0], sampled[k][1]);
    csv += buf;
  }
  ctx.files["curve.csv"] = std::move(csv);
  json eps = json::array(), del = json::array();
  for (int r = 1; r <= curve.depth(); ++r) {
    eps.push_back(curve.epsilon(r));
    del.push_back(curve.delta(r));
  }
  json body{{"alpha", alpha}, {"depth", depth}, {"k", curve.k()}, {"m", curve.m()}, {"epsilon", eps}, {"delta", del}};
  if (pairs > 0) {
    const HolderSandwich hs = holder_sandwich(curve, pairs, ctx.need_seed("random pair sampling"), min_gap);
    body["sandwich"] = json{{"c1", io::number(hs.c1)},
                            {"c2", io::number(hs.c2)},
                            {"ratio", io::number(hs.ratio)},
                            {"pairs", hs.pairs},
                            {"min_gap", hs.min_gap}};
  }
  ctx.report("curve.json", std::move(body));
}

std::optional<std::uint64_t> effective_seed(const json& cfg, std::optional<std::uint64_t> override_seed) {
  if (override_seed) return override_seed;
  if (!cfg.is_object() || !cfg.contains("seed") || cfg.at("seed").is_null()) return std::nullopt;
  const json& s = cfg.at("seed");
  if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
    throw ContractError("config.seed: expected a non-negative integer");
  }
  return cfg.at("seed").get<std::uint64_t>();
}

}  // namespace

Artifacts execute(const std::string& command, const json& config, std::optional<std::uint64_t> seed_override) {
  Context ctx;
  ctx.command = command;
  ctx.seed = effective_seed(config, seed_override);
  json cfg = config;
  if (cfg.is_object() && ctx.seed) cfg["seed"] = *ctx.seed;
  if (command == "solve") cmd_solve(cfg, ctx);
  else if (command == "convergence") cmd_convergence(cfg, ctx);
  else if (command == "chen-check") cmd_chen_check(cfg, ctx);
  else if (command == "condition21") cmd_condition21(cfg, ctx);
  else if (command == "nonuniqueness") cmd_nonuniqueness(cfg, ctx);
  else if (command == "explosion") cmd_explosion(cfg, ctx);
  else if (command == "curve") cmd_curve(cfg, ctx);
  else throw ContractError("unknown subcommand '" + command + "'");

  json hashes = json::object();
  for (const auto& [name, bytes] : ctx.files) hashes[name] = io::content_hash(bytes);
  json manifest{{"command", command},
                {"config", ctx.resolved},
                {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)},
                {"input_hash", io::content_hash(io::dump(ctx.resolved))},
                {"artifacts", std::move(hashes)},
                {"versions",
                 {{"roughstep", kVersion},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  ctx.files["manifest.json"] = io::dump(manifest);
  return ctx.files;
}

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed_override, std::ostream& err) {
  Artifacts files;
  try {
    std::ifstream is(config_path);
    if (!is) {
      err << "roughstep: cannot read config " << config_path << "\n";
      return kConfigError;
    }
    json cfg;
    try {
      cfg = json::parse(is);
    } catch (const json::parse_error& e) {
      err << "roughstep: malformed config: " << e.what() << "\n";
      return kConfigError;
    }
    files = execute(command, cfg, seed_override);
  } catch (const NumericalError& e) {
    err << "roughstep: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const ContractError& e) {
    err << "roughstep: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const CapabilityError& e) {
    err << "roughstep: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    err << "roughstep: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "roughstep: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  try {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, bytes] : files) io::write_file((std::filesystem::path(out_dir) / name).string(), bytes);
  } catch (const std::exception& e) {
    err << "roughstep: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

int main(int argc, char** argv) {
  CLI::App app{"Discrete approximations for rough differential equations"};
  app.require_subcommand(1);
  std::string config, out;
  std::optional<std::uint64_t> seed;
  for (const char* name : {"solve", "convergence", "chen-check", "condition21", "nonuniqueness", "explosion", "curve"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  return run(app.get_subcommands().front()->get_name(), config, out, seed, std::cerr);
}

}  // namespace roughstep::cli
