#include "fom/certify.hpp"

#include <cmath>
#include <cstdio>

namespace fom {

using nlohmann::json;

Relation relation_for(MethodKind method) {
  switch (method) {
    case MethodKind::SubgradA:
      return Relation::RHat;
    case MethodKind::SubgradB:
      return Relation::R;
    case MethodKind::Cgm:
      return Relation::RHatPrime;
    case MethodKind::Fgm:
      return Relation::R;
  }
  throw std::logic_error("unreachable");
}

std::vector<double> compute_Ck_nonsmooth(const RunTrace& trace) {
  std::vector<double> C;
  C.reserve(trace.records.size());
  double acc = 0;
  double prev_beta = trace.beta_init;
  for (const IterationRecord& r : trace.records) {
    acc += r.lambda * r.lambda * r.grad_dual_norm * r.grad_dual_norm /
           (2.0 * trace.sigma * prev_beta);
    prev_beta = r.beta;
    C.push_back(acc);
  }
  return C;
}

std::vector<double> compute_Ck_structured(const RunTrace& trace, MethodKind method) {
  if (method != MethodKind::Cgm && method != MethodKind::Fgm)
    throw std::invalid_argument("compute_Ck_structured: method must be cgm or fgm");
  std::vector<double> C;
  C.reserve(trace.records.size());
  double acc = 0;
  for (const IterationRecord& r : trace.records) {
    acc += (method == MethodKind::Cgm ? r.lambda : r.S) * r.delta;
    C.push_back(acc);
  }
  return C;
}

std::vector<double> compute_Ck(const RunTrace& trace) {
  if (trace.method == MethodKind::SubgradA || trace.method == MethodKind::SubgradB)
    return compute_Ck_nonsmooth(trace);
  return compute_Ck_structured(trace, trace.method);
}

std::vector<double> check_relation(const RunTrace& trace, const std::vector<double>& Ck,
                                   Relation which) {
  if (Ck.size() != trace.records.size())
    throw std::invalid_argument("check_relation: C_k length mismatch");
  std::vector<double> residual;
  residual.reserve(trace.records.size());
  double weighted_sum = 0;
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& r = trace.records[i];
    double lhs;
    switch (which) {
      case Relation::RHat:
        weighted_sum += r.lambda * r.f_x;
        lhs = weighted_sum;
        break;
      case Relation::RHatPrime:
        weighted_sum += r.lambda * r.f_z;  // f at x_{i+1} = z_i
        lhs = weighted_sum;
        break;
      case Relation::R:
        lhs = r.S * r.f_xhat;
        break;
    }
    residual.push_back(r.min_psi + Ck[i] - lhs);
  }
  return residual;
}

std::vector<BoundRow> check_bound(const RunTrace& trace, const ProxSetup& setup,
                                  const std::vector<double>& Ck, const OptimumInfo& optimum,
                                  bool use_d_surrogate, const Tolerances& tols) {
  if (!optimum.f_star)
    throw std::invalid_argument("check_bound: f* unknown");
  const bool have_x = optimum.x_star.has_value() && !use_d_surrogate;
  if (!have_x && !optimum.d_star_upper && !optimum.x_star)
    throw std::invalid_argument("check_bound: neither x* nor D available");
  double D = 0;
  if (!have_x)
    D = optimum.d_star_upper ? *optimum.d_star_upper : d_value(setup, *optimum.x_star);
  std::vector<BoundRow> rows;
  rows.reserve(trace.records.size());
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& r = trace.records[i];
    BoundRow row;
    bool ld_ok = true;
    double ld = D;
    if (have_x) {
      try {
        ld = l_d(setup, r.z, *optimum.x_star);
      } catch (const std::exception&) {
        ld_ok = false;  // z_k left the prox-function domain
        ld = 0;
      }
    }
    row.bound = (r.beta * ld + Ck[i]) / r.S;
    row.gap = r.f_xhat - *optimum.f_star;
    row.pass = ld_ok && row.gap <= row.bound + tols.relation_slack(row.bound);
    rows.push_back(row);
  }
  return rows;
}

double RateEnvelope::value(long k, double ld_star, double Mk) const {
  const double ld_pos = ld_star;
  switch (kind) {
    case Kind::SimpleAverages:
      return (gamma * ld_pos + Mk * Mk / (2.0 * sigma * gamma)) *
             (0.5 + std::sqrt(2.0 * k + 1.0)) / (k + 1.0);
    case Kind::WeightedAverages:
      return Mk / std::sqrt(sigma) * (ld_pos / rho + 0.5 * rho) *
             (0.5 + std::sqrt(2.0 * k + 1.0)) / (k + 1.0);
    case Kind::Cgm:
      return lipschitz * ld_pos / (sigma * (k + 1.0)) + delta;
    case Kind::Fgm:
      return 4.0 * lipschitz * ld_pos / (sigma * (k + 1.0) * (k + 2.0)) +
             (k + 3.0) * delta / 3.0;
  }
  throw std::logic_error("unreachable");
}

std::optional<RateEnvelope> envelope_from_trace(const RunTrace& trace) {
  const std::string kind = trace.schedule_desc.value("kind", "");
  RateEnvelope env;
  env.sigma = trace.sigma;
  for (const IterationRecord& r : trace.records) env.delta = std::max(env.delta, r.delta);
  if (kind == "simple_averages" &&
      (trace.method == MethodKind::SubgradA || trace.method == MethodKind::SubgradB)) {
    env.kind = RateEnvelope::Kind::SimpleAverages;
    env.gamma = trace.schedule_desc.value("gamma", 1.0);
    return env;
  }
  if (kind == "weighted_averages" &&
      (trace.method == MethodKind::SubgradA || trace.method == MethodKind::SubgradB)) {
    env.kind = RateEnvelope::Kind::WeightedAverages;
    env.rho = trace.schedule_desc.value("rho", 1.0);
    return env;
  }
  if (kind == "classic_smooth" && trace.method == MethodKind::Cgm) {
    env.kind = RateEnvelope::Kind::Cgm;
    env.lipschitz = trace.schedule_desc.at("L").get<double>();
    return env;
  }
  if (kind == "fast_smooth" && trace.method == MethodKind::Fgm) {
    env.kind = RateEnvelope::Kind::Fgm;
    env.lipschitz = trace.schedule_desc.at("L").get<double>();
    return env;
  }
  return std::nullopt;
}

std::vector<RateRow> check_rate(const RunTrace& trace, const ProxSetup& setup,
                                const RateEnvelope& envelope, const OptimumInfo& optimum,
                                const Tolerances& tols) {
  if (!optimum.f_star || !optimum.x_star)
    throw std::invalid_argument("check_rate: needs x* and f*");
  const bool nonsmooth =
      trace.method == MethodKind::SubgradA || trace.method == MethodKind::SubgradB;
  std::vector<RateRow> rows;
  rows.reserve(trace.records.size());
  double Mk = 0;
  double weighted_f = 0;
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& r = trace.records[i];
    Mk = std::max(Mk, r.grad_dual_norm);
    weighted_f += r.lambda * r.f_x;
    RateRow row;
    bool ld_ok = true;
    double ld = 0;
    try {
      ld = l_d(setup, r.z, *optimum.x_star);
    } catch (const std::exception&) {
      ld_ok = false;
    }
    row.envelope = envelope.value(r.k, ld, Mk);
    row.gap = r.f_xhat - *optimum.f_star;
    row.pass = ld_ok && row.gap <= row.envelope + tols.relation_slack(row.envelope);
    // the same envelope also dominates the weighted objective average for
    // test-point averaging methods
    if (nonsmooth && trace.method == MethodKind::SubgradA) {
      double avg_gap = weighted_f / r.S - *optimum.f_star;
      row.pass = row.pass && avg_gap <= row.envelope + tols.relation_slack(row.envelope);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<bool> check_step_conditions(const RunTrace& trace, MethodKind method,
                                        double rel_slack) {
  std::vector<bool> pass;
  pass.reserve(trace.records.size());
  double prev_beta = trace.beta_init;
  for (const IterationRecord& r : trace.records) {
    double lhs;
    if (method == MethodKind::Cgm)
      lhs = trace.sigma * prev_beta / r.lambda;
    else if (method == MethodKind::Fgm)
      lhs = trace.sigma * prev_beta * r.S / (r.lambda * r.lambda);
    else
      throw std::invalid_argument("check_step_conditions: method must be cgm or fgm");
    const double L = r.lipschitz;
    pass.push_back(!std::isnan(L) && lhs >= L * (1.0 - rel_slack) - 1e-12);
    prev_beta = r.beta;
  }
  return pass;
}

namespace {

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

double vec_rel_err(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double scale = std::max(1.0, std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()));
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

}  // namespace

ConsistencyReport check_consistency(const RunTrace& trace, const ProxSetup& setup,
                                    const Problem* problem) {
  ConsistencyReport report;
  auto fail = [&](long k, const std::string& what) {
    report.failures.push_back("k=" + std::to_string(k) + ": " + what);
  };
  constexpr double kTol = 1e-9;

  Schedule schedule = Schedule::from_json(trace.schedule_desc, trace.sigma, std::nullopt);
  if (rel_err(schedule.beta_init(), trace.beta_init) > kTol)
    fail(-1, "beta_init does not match the schedule");

  AuxState state = aux_init(setup, trace.beta_init);
  double S = 0, prev_beta = trace.beta_init, Cacc = 0;
  Vec prev_xhat, prev_x, prev_z;
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& r = trace.records[i];
    const Vec z_prev = state.minimizer;

    // dual norm of the recorded slope
    double gnorm = dual_norm(setup, r.reply_slope);
    if (rel_err(gnorm, r.grad_dual_norm) > kTol) fail(r.k, "grad_dual_norm mismatch");

    // schedule replay
    try {
      auto [lambda, beta] = schedule.next_params(r.k, gnorm);
      if (rel_err(lambda, r.lambda) > kTol) fail(r.k, "lambda deviates from the schedule");
      if (rel_err(beta, r.beta) > kTol) fail(r.k, "beta deviates from the schedule");
    } catch (const OptimalPointDetected&) {
      fail(r.k, "schedule signals optimality but the trace continues");
    }
    if (r.beta < prev_beta * (1.0 - 1e-12)) fail(r.k, "beta decreased");

    // S_k accumulation
    S += r.lambda;
    if (rel_err(S, r.S) > kTol) fail(r.k, "S_k accumulation mismatch");

    // test-point recursion
    switch (trace.method) {
      case MethodKind::SubgradA:
      case MethodKind::Cgm: {
        const Vec& expect = (i == 0) ? setup.x0() : prev_z;
        if (vec_rel_err(r.x, expect) > kTol) fail(r.k, "x_k != z_{k-1}");
        break;
      }
      case MethodKind::SubgradB: {
        Vec expect = (i == 0) ? z_prev : Vec(((r.S - r.lambda) * prev_x + r.lambda * z_prev) / r.S);
        if (vec_rel_err(r.x, expect) > kTol) fail(r.k, "x_k recursion mismatch");
        if (vec_rel_err(r.x, r.xhat) > kTol) fail(r.k, "xhat_k must equal x_k");
        break;
      }
      case MethodKind::Fgm: {
        Vec expect = (i == 0) ? setup.x0()
                              : Vec(((r.S - r.lambda) * prev_xhat + r.lambda * z_prev) / r.S);
        if (vec_rel_err(r.x, expect) > kTol) fail(r.k, "x_k recursion mismatch");
        break;
      }
    }

    // auxiliary-function replay
    OracleReply reply;
    reply.value = r.reply_value;
    reply.slope = r.reply_slope;
    reply.delta = r.delta;
    if (!std::isnan(r.lipschitz)) reply.lipschitz = r.lipschitz;
    reply.has_composite = trace.psi.is_l1();
    try {
      state = update_model(r.model, state, setup, trace.psi, reply, r.x, r.lambda, r.beta);
    } catch (const std::exception& e) {
      fail(r.k, std::string("aux replay failed: ") + e.what());
      break;
    }
    if (vec_rel_err(state.minimizer, r.z) > kTol) fail(r.k, "z_k is not the subproblem minimizer");
    if (rel_err(state.min_value, r.min_psi) > kTol) fail(r.k, "min_psi mismatch");

    // averaging recursion for the approximate solution
    switch (trace.method) {
      case MethodKind::SubgradA: {
        Vec expect = (i == 0) ? r.x : Vec(((r.S - r.lambda) * prev_xhat + r.lambda * r.x) / r.S);
        if (vec_rel_err(r.xhat, expect) > kTol) fail(r.k, "xhat averaging mismatch");
        break;
      }
      case MethodKind::Cgm:
      case MethodKind::Fgm: {
        Vec expect = (i == 0) ? r.z : Vec(((r.S - r.lambda) * prev_xhat + r.lambda * r.z) / r.S);
        if (vec_rel_err(r.xhat, expect) > kTol) fail(r.k, "xhat averaging mismatch");
        break;
      }
      case MethodKind::SubgradB:
        break;  // already checked xhat == x
    }

    // C accumulation
    if (trace.method == MethodKind::SubgradA || trace.method == MethodKind::SubgradB)
      Cacc += r.lambda * r.lambda * gnorm * gnorm / (2.0 * trace.sigma * prev_beta);
    else if (trace.method == MethodKind::Cgm)
      Cacc += r.lambda * r.delta;
    else
      Cacc += r.S * r.delta;
    if (rel_err(Cacc, r.C) > kTol) fail(r.k, "C_k accumulation mismatch");
    prev_beta = r.beta;

    // feasibility
    if (!setup.contains(r.x, 1e-8) || !setup.contains(r.z, 1e-8) ||
        !setup.contains(r.xhat, 1e-8))
      fail(r.k, "iterate leaves the feasible set");

    // objective re-evaluation
    if (problem) {
      if (rel_err(problem->true_value(r.x), r.f_x) > kTol) fail(r.k, "f(x_k) mismatch");
      if (rel_err(problem->true_value(r.z), r.f_z) > kTol) fail(r.k, "f(z_k) mismatch");
      if (rel_err(problem->true_value(r.xhat), r.f_xhat) > kTol) fail(r.k, "f(xhat_k) mismatch");
      OracleReply fresh = problem->query(r.x);
      if (rel_err(fresh.value, r.reply_value) > kTol) fail(r.k, "oracle value mismatch");
      if (vec_rel_err(fresh.slope, r.reply_slope) > kTol) fail(r.k, "oracle slope mismatch");
    }

    prev_x = r.x;
    prev_z = r.z;
    prev_xhat = r.xhat;
    if (report.failures.size() > 50) break;  // enough evidence
  }
  return report;
}

bool Certificate::all_pass() const {
  for (bool b : relation_pass)
    if (!b) return false;
  for (const BoundRow& b : bound)
    if (!b.pass) return false;
  for (const RateRow& r : rate)
    if (!r.pass) return false;
  for (bool b : step_pass)
    if (!b) return false;
  return consistency.pass();
}

Certificate certify(const RunTrace& trace, const ProxSetup& setup, const Problem* problem,
                    const OptimumInfo* optimum, const Tolerances& tols) {
  Certificate cert;
  cert.C = compute_Ck(trace);
  cert.residual = check_relation(trace, cert.C, relation_for(trace.method));
  cert.relation_pass.reserve(cert.residual.size());
  for (size_t i = 0; i < cert.residual.size(); ++i) {
    double scale = std::abs(trace.records[i].min_psi);
    cert.relation_pass.push_back(cert.residual[i] >= -tols.relation_slack(scale));
  }
  if (optimum && optimum->f_star && (optimum->x_star || optimum->d_star_upper))
    cert.bound = check_bound(trace, setup, cert.C, *optimum, false, tols);
  if (optimum && optimum->f_star && optimum->x_star) {
    if (auto env = envelope_from_trace(trace))
      cert.rate = check_rate(trace, setup, *env, *optimum, tols);
  }
  if (trace.method == MethodKind::Cgm || trace.method == MethodKind::Fgm)
    cert.step_pass = check_step_conditions(trace, trace.method);
  cert.consistency = check_consistency(trace, setup, problem);
  return cert;
}

void to_json(json& j, const Certificate& cert) {
  j = json{{"C", cert.C},
           {"residual", cert.residual},
           {"relation_pass", cert.relation_pass},
           {"consistency_pass", cert.consistency.pass()},
           {"consistency_failures", cert.consistency.failures},
           {"all_pass", cert.all_pass()}};
  if (!cert.bound.empty()) {
    std::vector<double> bound, gap;
    std::vector<bool> pass;
    for (const BoundRow& b : cert.bound) {
      bound.push_back(b.bound);
      gap.push_back(b.gap);
      pass.push_back(b.pass);
    }
    j["bound"] = bound;
    j["gap"] = gap;
    j["bound_pass"] = pass;
  }
  if (!cert.rate.empty()) {
    std::vector<double> env;
    std::vector<bool> pass;
    for (const RateRow& r : cert.rate) {
      env.push_back(r.envelope);
      pass.push_back(r.pass);
    }
    j["envelope"] = env;
    j["rate_pass"] = pass;
  }
  if (!cert.step_pass.empty()) j["step_pass"] = cert.step_pass;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const RunTrace& trace, const Certificate& cert) {
  os << "# fom-trace-csv v1\n";
  os << "k,f_xhat,gap,bound,residual,lambda,beta\n";
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& r = trace.records[i];
    os << r.k << ',' << format_double(r.f_xhat) << ',';
    if (i < cert.bound.size())
      os << format_double(cert.bound[i].gap) << ',' << format_double(cert.bound[i].bound);
    else
      os << ',';
    os << ',' << format_double(cert.residual[i]) << ',' << format_double(r.lambda) << ','
       << format_double(r.beta) << '\n';
  }
}

void write_certificate_csv(std::ostream& os, const RunTrace& trace, const Certificate& cert) {
  os << "# fom-certificate-csv v1\n";
  os << "k,gap,bound,envelope,residual,pass\n";
  for (size_t i = 0; i < trace.records.size(); ++i) {
    bool pass = cert.relation_pass[i];
    os << trace.records[i].k << ',';
    if (i < cert.bound.size()) {
      os << format_double(cert.bound[i].gap) << ',' << format_double(cert.bound[i].bound);
      pass = pass && cert.bound[i].pass;
    } else {
      os << ',';
    }
    os << ',';
    if (i < cert.rate.size()) {
      os << format_double(cert.rate[i].envelope);
      pass = pass && cert.rate[i].pass;
    }
    if (i < cert.step_pass.size()) pass = pass && cert.step_pass[i];
    os << ',' << format_double(cert.residual[i]) << ',' << (pass ? 1 : 0) << '\n';
  }
}

}  // namespace fom
