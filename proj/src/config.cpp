#include "vslab/config.hpp"

#include <cmath>
#include <fstream>

namespace vslab {

namespace {

std::string shape_name(LossShape s) { return s == LossShape::exponential ? "exponential" : "logistic"; }

LossShape parse_shape(const std::string& s) {
  if (s == "exponential") return LossShape::exponential;
  if (s == "logistic") return LossShape::logistic;
  throw ConfigError("loss shape must be 'exponential' or 'logistic', got '" + s + "'");
}

SolverChoice parse_solver(const std::string& s) {
  if (s == "gd") return SolverChoice::gd;
  if (s == "cs_svm") return SolverChoice::cs_svm;
  if (s == "both") return SolverChoice::both;
  throw ConfigError("solver must be gd, cs_svm or both, got '" + s + "'");
}

Fig2Variant parse_variant(const std::string& s) {
  if (s == "fixed" || s == "fixed_tau") return Fig2Variant::fixed_tau;
  if (s == "growing" || s == "growing_tau") return Fig2Variant::growing_tau;
  throw ConfigError("variant must be 'fixed' or 'growing', got '" + s + "'");
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

void check_keys(const Json& user, const Json& defaults, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const Json& def = defaults.at(it.key());
    if (def.is_object() && !it.value().is_null()) check_keys(it.value(), def, key);
  }
}

void merge(Json& base, const Json& user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
      merge(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

Json sweep_json(const SweepGrid& g, const Json& preset, const std::string& variant) {
  Json losses = Json::array();
  for (const LossConfig& l : g.losses) losses.push_back(l.name);
  return {
      {"preset", preset},
      {"variant", variant},
      {"dims", g.dims},
      {"n", g.n},
      {"tau_rule",
       {{"kind", g.tau_rule.kind == TauRule::Kind::fixed ? "fixed" : "power"},
        {"value", g.tau_rule.value}}},
      {"r_plus_rule",
       {{"coefficient", g.r_plus_rule.coefficient}, {"exponent", g.r_plus_rule.exponent}}},
      {"r_ratio", g.r_ratio},
      {"xi", g.xi},
      {"losses", losses},
      {"loss_shape", shape_name(g.losses.empty() ? LossShape::exponential : g.losses.front().shape)},
      {"iota_scale", g.losses.empty() ? 1.0 : g.losses.front().iota_scale},
      {"seeds", g.seeds},
      {"solver", to_string(g.solver)},
      {"mc_samples", g.mc_samples},
      {"timing", g.timing},
  };
}

void apply_sweep_keys(SweepGrid& g, const Json& s) {
  if (s.contains("dims")) g.dims = s.at("dims").get<std::vector<int>>();
  if (s.contains("n")) g.n = s.at("n").get<int>();
  if (s.contains("tau_rule")) {
    const Json& t = s.at("tau_rule");
    if (t.contains("kind")) {
      const std::string kind = t.at("kind").get<std::string>();
      if (kind == "fixed")
        g.tau_rule.kind = TauRule::Kind::fixed;
      else if (kind == "power")
        g.tau_rule.kind = TauRule::Kind::power;
      else
        throw ConfigError("sweep.tau_rule.kind must be 'fixed' or 'power'");
    }
    if (t.contains("value")) g.tau_rule.value = t.at("value").get<double>();
  }
  if (s.contains("r_plus_rule")) {
    const Json& r = s.at("r_plus_rule");
    if (r.contains("coefficient")) g.r_plus_rule.coefficient = r.at("coefficient").get<double>();
    if (r.contains("exponent")) g.r_plus_rule.exponent = r.at("exponent").get<double>();
  }
  if (s.contains("r_ratio")) g.r_ratio = s.at("r_ratio").get<double>();
  if (s.contains("xi")) g.xi = s.at("xi").get<double>();
  if (s.contains("losses")) {
    g.losses.clear();
    for (const auto& name : s.at("losses").get<std::vector<std::string>>())
      g.losses.push_back(LossConfig{name});
  }
  if (s.contains("loss_shape")) {
    const LossShape shape = parse_shape(s.at("loss_shape").get<std::string>());
    for (LossConfig& l : g.losses) l.shape = shape;
  }
  if (s.contains("iota_scale")) {
    const double scale = s.at("iota_scale").get<double>();
    for (LossConfig& l : g.losses) l.iota_scale = scale;
  }
  if (s.contains("seeds")) g.seeds = s.at("seeds").get<std::vector<std::uint64_t>>();
  if (s.contains("solver")) g.solver = parse_solver(s.at("solver").get<std::string>());
  if (s.contains("mc_samples")) g.mc_samples = s.at("mc_samples").get<int>();
  if (s.contains("timing")) g.timing = s.at("timing").get<bool>();
}

}  // namespace

Json to_json(const CliConfig& c) {
  const ProblemConfig& p = c.problem;
  const LossSection& l = c.loss;
  Json j;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["workers"] = c.workers;
  j["problem"] = {
      {"d", p.d},
      {"d_core", optional_json(p.d_core)},
      {"n", p.n},
      {"tau", p.tau},
      {"n_plus", optional_json(p.n_plus)},
      {"n_minus", optional_json(p.n_minus)},
      {"r_plus", optional_json(p.r_plus)},
      {"r_ratio", p.r_ratio},
      {"label_flip_rate", p.label_flip_rate},
      {"sampling_mode", p.sampling_mode == SamplingMode::fixed_counts ? "fixed_counts" : "probabilistic"},
      {"pi_plus", p.pi_plus},
      {"max_entries", p.max_entries},
  };
  j["loss"] = {
      {"name", l.loss.name},
      {"shape", shape_name(l.loss.shape)},
      {"tuning", l.tuning},
      {"iota_scale", l.loss.iota_scale},
      {"delta_plus", l.delta.plus},
      {"delta_minus", l.delta.minus},
      {"iota_plus", l.iota.plus},
      {"iota_minus", l.iota.minus},
      {"omega_plus", l.omega.plus},
      {"omega_minus", l.omega.minus},
  };
  j["gd"] = {
      {"step_size", c.gd.step_size ? Json(*c.gd.step_size) : Json("auto")},
      {"max_iters", c.gd.max_iters},
      {"stop_direction_tol", c.gd.stop_direction_tol},
      {"stop_window", c.gd.stop_window},
      {"telemetry_stride", c.gd.telemetry_stride},
      {"init_ball_c0", c.gd.init_ball_c0},
      {"record_sample_derivatives", c.gd.record_sample_derivatives},
      {"init", c.init.kind},
      {"init_norm", c.init.norm},
  };
  j["svm"] = {
      {"tol", c.svm.tol},
      {"max_passes", c.svm.max_passes},
      {"ceiling_factor", c.svm.ceiling_factor},
      {"active_tol", c.svm.active_tol},
      {"try_min_norm", c.svm.try_min_norm},
      {"cond_threshold", c.svm.cond_threshold},
  };
  j["diagnostics"] = {
      {"c1", c.diagnostics.c1},
      {"C", c.diagnostics.C},
      {"delta", c.diagnostics.delta},
      {"kkt_tol", c.diagnostics.kkt_tol},
      {"margin_spread_tol", c.diagnostics.margin_spread_tol},
      {"ratio_ceiling", c.diagnostics.ratio_ceiling},
  };
  j["risk"] = {
      {"mc_samples", c.risk.mc_samples},
      {"bound_c", c.risk.bound_c},
      {"bound_c1", c.risk.bound_c1},
  };
  j["sweep"] = sweep_json(c.sweep, nullptr, "fixed");
  return j;
}

Json default_config_json() { return to_json(CliConfig{}); }

CliConfig parse_config(const Json& user) {
  const Json defaults = default_config_json();
  check_keys(user, defaults, "");
  Json merged = defaults;
  merge(merged, user);

  CliConfig c;
  try {
    c.seed = merged.at("seed").get<std::uint64_t>();
    c.out = merged.at("out").get<std::string>();
    c.workers = merged.at("workers").get<int>();
    if (c.workers < 1) throw ConfigError("workers must be at least 1");

    const Json& p = merged.at("problem");
    c.problem.d = p.at("d").get<int>();
    c.problem.d_core = optional_from<int>(p.at("d_core"));
    c.problem.n = p.at("n").get<int>();
    c.problem.tau = p.at("tau").get<double>();
    c.problem.n_plus = optional_from<int>(p.at("n_plus"));
    c.problem.n_minus = optional_from<int>(p.at("n_minus"));
    c.problem.r_plus = optional_from<double>(p.at("r_plus"));
    c.problem.r_ratio = p.at("r_ratio").get<double>();
    c.problem.label_flip_rate = p.at("label_flip_rate").get<double>();
    const std::string mode = p.at("sampling_mode").get<std::string>();
    if (mode == "fixed_counts")
      c.problem.sampling_mode = SamplingMode::fixed_counts;
    else if (mode == "probabilistic")
      c.problem.sampling_mode = SamplingMode::probabilistic;
    else
      throw ConfigError("problem.sampling_mode must be fixed_counts or probabilistic");
    c.problem.pi_plus = p.at("pi_plus").get<double>();
    c.problem.max_entries = p.at("max_entries").get<std::int64_t>();

    const Json& l = merged.at("loss");
    c.loss.loss.name = l.at("name").get<std::string>();
    c.loss.loss.shape = parse_shape(l.at("shape").get<std::string>());
    c.loss.tuning = l.at("tuning").get<std::string>();
    if (c.loss.tuning != "paper" && c.loss.tuning != "manual")
      throw ConfigError("loss.tuning must be 'paper' or 'manual'");
    c.loss.loss.iota_scale = l.at("iota_scale").get<double>();
    c.loss.delta = {l.at("delta_plus").get<double>(), l.at("delta_minus").get<double>()};
    c.loss.iota = {l.at("iota_plus").get<double>(), l.at("iota_minus").get<double>()};
    c.loss.omega = {l.at("omega_plus").get<double>(), l.at("omega_minus").get<double>()};
    make_loss_params(c.loss.loss, 1, 1);

    const Json& g = merged.at("gd");
    const Json& step = g.at("step_size");
    if (step.is_string()) {
      if (step.get<std::string>() != "auto") throw ConfigError("gd.step_size must be a number or 'auto'");
      c.gd.step_size.reset();
    } else {
      c.gd.step_size = step.get<double>();
    }
    c.gd.max_iters = g.at("max_iters").get<std::int64_t>();
    c.gd.stop_direction_tol = g.at("stop_direction_tol").get<double>();
    c.gd.stop_window = g.at("stop_window").get<int>();
    c.gd.telemetry_stride = g.at("telemetry_stride").get<std::int64_t>();
    c.gd.init_ball_c0 = g.at("init_ball_c0").get<double>();
    c.gd.record_sample_derivatives = g.at("record_sample_derivatives").get<bool>();
    c.init.kind = g.at("init").get<std::string>();
    if (c.init.kind != "zero" && c.init.kind != "random")
      throw ConfigError("gd.init must be 'zero' or 'random'");
    c.init.norm = g.at("init_norm").get<double>();
    validate(c.gd);

    const Json& s = merged.at("svm");
    c.svm.tol = s.at("tol").get<double>();
    c.svm.max_passes = s.at("max_passes").get<int>();
    c.svm.ceiling_factor = s.at("ceiling_factor").get<double>();
    c.svm.active_tol = s.at("active_tol").get<double>();
    c.svm.try_min_norm = s.at("try_min_norm").get<bool>();
    c.svm.cond_threshold = s.at("cond_threshold").get<double>();

    const Json& dg = merged.at("diagnostics");
    c.diagnostics.c1 = dg.at("c1").get<double>();
    c.diagnostics.C = dg.at("C").get<double>();
    c.diagnostics.delta = dg.at("delta").get<double>();
    c.diagnostics.kkt_tol = dg.at("kkt_tol").get<double>();
    c.diagnostics.margin_spread_tol = dg.at("margin_spread_tol").get<double>();
    c.diagnostics.ratio_ceiling = dg.at("ratio_ceiling").get<double>();
    validate(c.diagnostics);

    const Json& r = merged.at("risk");
    c.risk.mc_samples = r.at("mc_samples").get<int>();
    c.risk.bound_c = r.at("bound_c").get<double>();
    c.risk.bound_c1 = r.at("bound_c1").get<double>();

    const Json& sw = merged.at("sweep");
    const Json user_sweep = user.contains("sweep") ? user.at("sweep") : Json::object();
    if (!sw.at("preset").is_null()) {
      const std::string preset = sw.at("preset").get<std::string>();
      if (preset != "fig2") throw ConfigError("sweep.preset must be 'fig2' or null");
      c.sweep = fig2_preset(parse_variant(sw.at("variant").get<std::string>()));
      apply_sweep_keys(c.sweep, user_sweep);
    } else {
      c.sweep = fig2_preset(Fig2Variant::fixed_tau);
      c.sweep.label = "custom";
      apply_sweep_keys(c.sweep, sw);
    }
    c.sweep.gd = c.gd;
    c.sweep.svm = c.svm;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse config file '" + path.string() + "': " + e.what());
  }
  return parse_config(j);
}

ProblemSpec problem_spec(const ProblemConfig& cfg) {
  if (cfg.d < 2) throw ConfigError("problem.d must be at least 2");
  int n_plus = 0;
  int n_minus = 0;
  if (cfg.n_plus || cfg.n_minus) {
    if (!cfg.n_plus || !cfg.n_minus)
      throw ConfigError("problem.n_plus and problem.n_minus must be given together");
    n_plus = *cfg.n_plus;
    n_minus = *cfg.n_minus;
  } else {
    std::tie(n_plus, n_minus) = group_sizes(cfg.n, cfg.tau);
  }
  const double r_plus = cfg.r_plus.value_or(RPlusRule{}.r_plus(cfg.d));
  ProblemSpec spec = make_block_spec(cfg.d, r_plus, cfg.r_ratio, n_plus, n_minus, cfg.label_flip_rate);
  if (cfg.d_core) {
    const int dc = *cfg.d_core;
    if (dc < 1 || dc >= cfg.d) throw ConfigError("problem.d_core must lie in [1, d - 1]");
    const double core = spec.mu_core(0);
    const double spur = spec.mu_spur(0);
    spec.d_core = dc;
    spec.d_spur = cfg.d - dc;
    spec.mu_core = Vector::Zero(dc);
    spec.mu_spur = Vector::Zero(cfg.d - dc);
    spec.mu_core(0) = core;
    spec.mu_spur(0) = spur;
  }
  spec.sampling_mode = cfg.sampling_mode;
  spec.pi_plus = cfg.pi_plus;
  validate(spec);
  return spec;
}

VsLossParams loss_params(const LossSection& cfg, int n_plus, int n_minus) {
  if (cfg.tuning == "paper") return make_loss_params(cfg.loss, n_plus, n_minus);
  VsLossParams p;
  p.shape = cfg.loss.shape;
  p.delta = cfg.delta;
  p.iota = cfg.iota;
  p.omega = cfg.omega;
  if (!(p.delta.plus > 0 && p.delta.minus > 0 && p.omega.plus > 0 && p.omega.minus > 0))
    throw ConfigError("manual loss parameters need positive delta and omega");
  return p;
}

GdConfig gd_config(const CliConfig& cfg, int d) {
  GdConfig g = cfg.gd;
  if (cfg.init.kind == "random") {
    RngStream rng(cfg.seed, std::uint64_t{5} << 60);
    Vector w(d);
    rng.fill_normal(w);
    g.init = w * (cfg.init.norm / w.norm());
  }
  return g;
}

Json to_json(const ErrorReport& r) {
  Json j = {{"corr_plus", r.corr_plus}, {"corr_minus", r.corr_minus}, {"err_plus", r.err_plus},
            {"err_minus", r.err_minus}, {"wst_error", r.wst_error}};
  if (r.mc) {
    j["mc"] = {{"m_per_group", r.mc->m_per_group}, {"err_plus", r.mc->err_plus},
               {"err_minus", r.mc->err_minus},     {"radius_plus", r.mc->radius_plus},
               {"radius_minus", r.mc->radius_minus}};
  }
  if (!r.bound_evals.empty()) {
    j["bounds_constant_dependent"] = r.bound_evals;
  }
  return j;
}

Json to_json(const GoodEventReport& r) {
  Json checks = Json::object();
  for (const InequalityCheck* c : r.checks()) {
    checks[c->name] = {{"pass", c->pass},
                       {"worst_slack", std::isfinite(c->worst_slack) ? Json(c->worst_slack) : Json(nullptr)},
                       {"required_c1", std::isfinite(c->required_c1) ? Json(c->required_c1) : Json(nullptr)},
                       {"instances", c->instances}};
  }
  return {{"overall", r.overall},
          {"smallest_c1", std::isfinite(r.smallest_c1) ? Json(r.smallest_c1) : Json(nullptr)},
          {"checks", checks}};
}

Json to_json(const AssumptionReport& r) {
  return {{"A_samples", r.a}, {"B_core_snr", r.b}, {"C_d_vs_snr", r.c},
          {"D_d_vs_n2", r.d}, {"largest_C", r.largest_C}};
}

Json to_json(const SeparabilityWitness& r) {
  return {{"separable", r.separable},
          {"min_margin", r.min_margin},
          {"reference_scale_sqrt_d_over_n", r.reference_scale}};
}

Json to_json(const VsLossParams& p) {
  return {{"shape", shape_name(p.shape)},
          {"delta_plus", p.delta.plus}, {"delta_minus", p.delta.minus},
          {"iota_plus", p.iota.plus},   {"iota_minus", p.iota.minus},
          {"omega_plus", p.omega.plus}, {"omega_minus", p.omega.minus}};
}

}  // namespace vslab
