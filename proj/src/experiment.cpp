#include "fom/experiment.hpp"

#include <fstream>

namespace fom {

using nlohmann::json;

namespace {

Problem build_problem(const json& j) {
  if (j.contains("A")) return problem_from_json(j);
  const std::string variant = j.at("variant").get<std::string>();
  const int dim = j.at("dim").get<int>();
  const std::uint64_t seed = j.value("seed", 0ULL);
  ProblemGenOptions options;
  options.pieces = j.value("pieces", options.pieces);
  options.cond = j.value("cond", options.cond);
  options.l1_weight = j.value("l1_weight", options.l1_weight);
  options.delta0 = j.value("delta0", options.delta0);
  ProblemVariant v;
  if (variant == "max_affine")
    v = ProblemVariant::MaxAffine;
  else if (variant == "l1_regression")
    v = ProblemVariant::L1Regression;
  else if (variant == "quadratic")
    v = ProblemVariant::Quadratic;
  else if (variant == "composite_lasso")
    v = ProblemVariant::CompositeLasso;
  else if (variant == "inexact")
    v = ProblemVariant::InexactWrapper;
  else
    throw ConfigError("unknown problem variant " + variant);
  return make_random_problem(v, dim, seed, options);
}

Schedule schedule_for(const json& run, const std::optional<Schedule::Kind>& pinned,
                      const Problem& problem, const ProxSetup& setup) {
  const auto L = problem.lipschitz();
  if (run.contains("schedule")) {
    Schedule s = Schedule::from_json(run.at("schedule"), setup.sigma(), L);
    if (pinned && s.kind() != *pinned)
      throw ConfigError("run schedule kind conflicts with the preset");
    return s;
  }
  if (pinned) {
    switch (*pinned) {
      case Schedule::Kind::MdmClassic:
        return Schedule::mdm_classic();
      case Schedule::Kind::ClassicSmooth:
        if (!L) throw ConfigError("classic_smooth needs a Lipschitz constant");
        return Schedule::classic_smooth(*L, setup.sigma());
      case Schedule::Kind::TsengLambda:
        if (!L) throw ConfigError("tseng_lambda needs a Lipschitz constant");
        return Schedule::tseng_lambda(*L, setup.sigma());
      default:
        break;
    }
  }
  // sensible defaults per method class
  if (!problem.nonsmooth_class()) {
    if (!L) throw ConfigError("structured run without a schedule or Lipschitz constant");
    return Schedule::fast_smooth(*L, setup.sigma());
  }
  return Schedule::simple_averages(1.0);
}

}  // namespace

Experiment load_experiment(const json& config) {
  Experiment exp{build_problem(config.at("problem")), setup_from_json(config.at("setup")),
                 {}, {}, {}};
  if (exp.problem.dim() != exp.setup.dim())
    throw ConfigError("problem and setup dimensions differ");

  if (!config.contains("runs") || !config.at("runs").is_array() ||
      config.at("runs").empty())
    throw ConfigError("config needs a non-empty runs array");

  for (const json& run : config.at("runs")) {
    ExperimentRun er;
    std::optional<Schedule::Kind> pinned;
    if (run.contains("preset")) {
      const std::string name = run.at("preset").get<std::string>();
      Preset p = preset(name);
      er.name = run.value("name", name);
      er.config.method = p.method;
      er.config.mix = run.contains("mix") ? MixPolicy::from_json(run.at("mix")) : p.mix;
      pinned = p.schedule_kind;
    } else if (run.contains("method")) {
      er.config.method = method_from_string(run.at("method").get<std::string>());
      er.name = run.value("name", to_string(er.config.method));
      er.config.mix = run.contains("mix") ? MixPolicy::from_json(run.at("mix"))
                                          : MixPolicy::pure_md();
    } else {
      throw ConfigError("each run needs a preset or a method");
    }
    er.config.schedule = schedule_for(run, pinned, exp.problem, exp.setup);
    er.config.max_iters = run.value("max_iters", 1000L);
    if (er.config.max_iters < 1) throw ConfigError("max_iters must be >= 1");
    er.config.seed = run.value("seed", 0ULL);
    if (run.contains("target_gap")) er.config.target_gap = run.at("target_gap").get<double>();
    exp.runs.push_back(std::move(er));
  }

  exp.optimum = known_optimum(exp.problem, exp.setup.set());
  if (config.contains("optimum")) {
    const json& o = config.at("optimum");
    if (o.contains("f_star")) exp.optimum.f_star = o.at("f_star").get<double>();
    if (o.contains("x_star")) {
      auto v = o.at("x_star").get<std::vector<double>>();
      exp.optimum.x_star = Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
    }
    if (o.contains("d_upper")) exp.optimum.d_star_upper = o.at("d_upper").get<double>();
  }

  if (config.contains("tolerance")) {
    const json& t = config.at("tolerance");
    exp.tols.residual_abs = t.value("residual", exp.tols.residual_abs);
    exp.tols.residual_rel = t.value("residual_rel", exp.tols.residual_rel);
    exp.tols.identity = t.value("identity", exp.tols.identity);
  }
  return exp;
}

Experiment load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json config;
  try {
    in >> config;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    return load_experiment(config);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

}  // namespace fom
