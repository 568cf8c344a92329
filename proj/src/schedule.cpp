#include "fom/schedule.hpp"

#include <cmath>
#include <mutex>

namespace fom {

using nlohmann::json;

double beta_hat(long k) {
  if (k < -1) throw std::invalid_argument("beta_hat: k must be >= -1");
  if (k <= 0) return 1.0;
  static std::vector<double> memo{1.0, 1.0};  // memo[i] = bh(i-1)
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<long>(memo.size()) <= k + 1) {
    double last = memo.back();
    memo.push_back(last + 1.0 / last);
  }
  return memo[static_cast<size_t>(k + 1)];
}

Schedule Schedule::simple_averages(double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("simple_averages: gamma must be positive");
  Schedule s;
  s.kind_ = Kind::SimpleAverages;
  s.gamma_ = gamma;
  return s;
}

Schedule Schedule::weighted_averages(double rho, double sigma) {
  if (!(rho > 0)) throw std::invalid_argument("weighted_averages: rho must be positive");
  if (!(sigma > 0)) throw std::invalid_argument("weighted_averages: sigma must be positive");
  Schedule s;
  s.kind_ = Kind::WeightedAverages;
  s.rho_ = rho;
  s.sigma_ = sigma;
  return s;
}

Schedule Schedule::classic_smooth(double L, double sigma) {
  if (!(L > 0)) throw std::invalid_argument("classic_smooth: L must be positive");
  Schedule s;
  s.kind_ = Kind::ClassicSmooth;
  s.lipschitz_ = L;
  s.sigma_ = sigma;
  return s;
}

Schedule Schedule::fast_smooth(double L, double sigma) {
  if (!(L > 0)) throw std::invalid_argument("fast_smooth: L must be positive");
  Schedule s;
  s.kind_ = Kind::FastSmooth;
  s.lipschitz_ = L;
  s.sigma_ = sigma;
  return s;
}

Schedule Schedule::tseng_lambda(double L, double sigma) {
  if (!(L > 0)) throw std::invalid_argument("tseng_lambda: L must be positive");
  Schedule s;
  s.kind_ = Kind::TsengLambda;
  s.lipschitz_ = L;
  s.sigma_ = sigma;
  return s;
}

Schedule Schedule::mdm_classic(double r) {
  if (!(r > 0)) throw std::invalid_argument("mdm_classic: rate must be positive");
  Schedule s;
  s.kind_ = Kind::MdmClassic;
  s.mdm_rate_ = r;
  return s;
}

Schedule Schedule::mdm_classic_list(std::vector<double> lambdas) {
  for (double l : lambdas)
    if (!(l > 0)) throw std::invalid_argument("mdm_classic: lambdas must be positive");
  Schedule s;
  s.kind_ = Kind::MdmClassic;
  s.lambdas_ = std::move(lambdas);
  return s;
}

Schedule Schedule::custom(std::vector<double> lambdas, double beta_init,
                          std::vector<double> betas) {
  if (!(beta_init > 0)) throw std::invalid_argument("custom: beta_init must be positive");
  for (double l : lambdas)
    if (!(l > 0)) throw std::invalid_argument("custom: lambdas must be positive");
  double prev = beta_init;
  for (double b : betas) {
    if (b < prev) throw std::invalid_argument("custom: betas must be non-decreasing");
    prev = b;
  }
  if (betas.size() != lambdas.size())
    throw std::invalid_argument("custom: lambda/beta length mismatch");
  Schedule s;
  s.kind_ = Kind::Custom;
  s.lambdas_ = std::move(lambdas);
  s.betas_.push_back(beta_init);
  for (double b : betas) s.betas_.push_back(b);
  return s;
}

double Schedule::beta_init() const {
  switch (kind_) {
    case Kind::SimpleAverages:
      return gamma_;  // gamma * bh(-1)
    case Kind::WeightedAverages:
      return 1.0 / (rho_ * std::sqrt(sigma_));
    case Kind::ClassicSmooth:
    case Kind::FastSmooth:
    case Kind::TsengLambda:
      return lipschitz_ / sigma_;
    case Kind::MdmClassic:
      return 1.0;
    case Kind::Custom:
      return betas_.front();
  }
  throw std::logic_error("unreachable");
}

double Schedule::tseng_lambda_at(long k) const {
  double lam = 1.0;
  for (long i = 0; i < k; ++i) lam = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * lam * lam));
  return lam;
}

std::pair<double, double> Schedule::next_params(long k,
                                                std::optional<double> grad_dual_norm) const {
  if (k < 0) throw std::invalid_argument("next_params: k must be >= 0");
  switch (kind_) {
    case Kind::SimpleAverages:
      return {1.0, gamma_ * beta_hat(k)};
    case Kind::WeightedAverages: {
      if (!grad_dual_norm)
        throw std::invalid_argument("weighted_averages: gradient norm required");
      if (*grad_dual_norm == 0.0)
        throw OptimalPointDetected("weighted_averages: zero subgradient at the test point");
      return {1.0 / *grad_dual_norm, beta_hat(k) / (rho_ * std::sqrt(sigma_))};
    }
    case Kind::ClassicSmooth:
      return {1.0, lipschitz_ / sigma_};
    case Kind::FastSmooth:
      return {0.5 * (k + 1), lipschitz_ / sigma_};
    case Kind::TsengLambda:
      return {tseng_lambda_at(k), lipschitz_ / sigma_};
    case Kind::MdmClassic: {
      if (!lambdas_.empty()) {
        if (k >= static_cast<long>(lambdas_.size()))
          throw std::invalid_argument("mdm_classic: lambda list exhausted");
        return {lambdas_[static_cast<size_t>(k)], 1.0};
      }
      return {mdm_rate_ / std::sqrt(static_cast<double>(k + 1)), 1.0};
    }
    case Kind::Custom: {
      if (k >= static_cast<long>(lambdas_.size()))
        throw std::invalid_argument("custom: schedule exhausted");
      return {lambdas_[static_cast<size_t>(k)], betas_[static_cast<size_t>(k + 1)]};
    }
  }
  throw std::logic_error("unreachable");
}

json Schedule::to_json() const {
  switch (kind_) {
    case Kind::SimpleAverages:
      return json{{"kind", "simple_averages"}, {"gamma", gamma_}};
    case Kind::WeightedAverages:
      return json{{"kind", "weighted_averages"}, {"rho", rho_}};
    case Kind::ClassicSmooth:
      return json{{"kind", "classic_smooth"}, {"L", lipschitz_}};
    case Kind::FastSmooth:
      return json{{"kind", "fast_smooth"}, {"L", lipschitz_}};
    case Kind::TsengLambda:
      return json{{"kind", "tseng_lambda"}, {"L", lipschitz_}};
    case Kind::MdmClassic:
      if (!lambdas_.empty()) return json{{"kind", "mdm_classic"}, {"lambdas", lambdas_}};
      return json{{"kind", "mdm_classic"}, {"rate", mdm_rate_}};
    case Kind::Custom: {
      std::vector<double> betas(betas_.begin() + 1, betas_.end());
      return json{{"kind", "custom"},
                  {"lambdas", lambdas_},
                  {"beta_init", betas_.front()},
                  {"betas", betas}};
    }
  }
  throw std::logic_error("unreachable");
}

Schedule Schedule::from_json(const json& j, double sigma,
                             std::optional<double> problem_lipschitz) {
  const std::string kind = j.at("kind").get<std::string>();
  auto lipschitz = [&]() {
    if (j.contains("L")) return j.at("L").get<double>();
    if (problem_lipschitz) return *problem_lipschitz;
    throw std::invalid_argument("schedule: L not given and not derivable from the problem");
  };
  if (kind == "simple_averages") return simple_averages(j.value("gamma", 1.0));
  if (kind == "weighted_averages") return weighted_averages(j.value("rho", 1.0), sigma);
  if (kind == "classic_smooth") return classic_smooth(lipschitz(), sigma);
  if (kind == "fast_smooth") return fast_smooth(lipschitz(), sigma);
  if (kind == "tseng_lambda") return tseng_lambda(lipschitz(), sigma);
  if (kind == "mdm_classic") {
    if (j.contains("lambdas"))
      return mdm_classic_list(j.at("lambdas").get<std::vector<double>>());
    return mdm_classic(j.value("rate", 1.0));
  }
  if (kind == "custom")
    return custom(j.at("lambdas").get<std::vector<double>>(), j.at("beta_init").get<double>(),
                  j.at("betas").get<std::vector<double>>());
  throw std::invalid_argument("schedule: unknown kind " + kind);
}

MixPolicy MixPolicy::pure_md() { return {}; }

MixPolicy MixPolicy::pure_da() {
  MixPolicy p;
  p.kind_ = Kind::PureDa;
  return p;
}

MixPolicy MixPolicy::pattern(std::vector<ModelChoice> word) {
  if (word.empty()) throw std::invalid_argument("mix pattern: empty word");
  MixPolicy p;
  p.kind_ = Kind::Pattern;
  p.word_ = std::move(word);
  return p;
}

MixPolicy MixPolicy::seeded_random(std::uint64_t seed) {
  MixPolicy p;
  p.kind_ = Kind::SeededRandom;
  p.seed_ = seed;
  return p;
}

ModelChoice MixPolicy::choice(long k) const {
  if (k < 0) throw std::invalid_argument("mix: k must be >= 0");
  switch (kind_) {
    case Kind::PureMd:
      return ModelChoice::MD;
    case Kind::PureDa:
      return ModelChoice::DA;
    case Kind::Pattern:
      return word_[static_cast<size_t>(k) % word_.size()];
    case Kind::SeededRandom: {
      std::uint64_t h = seed_ + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1);
      return (splitmix64(h) & 1) ? ModelChoice::DA : ModelChoice::MD;
    }
  }
  throw std::logic_error("unreachable");
}

json MixPolicy::to_json() const {
  switch (kind_) {
    case Kind::PureMd:
      return json{{"policy", "pure_md"}};
    case Kind::PureDa:
      return json{{"policy", "pure_da"}};
    case Kind::Pattern: {
      std::string w;
      for (ModelChoice m : word_) w += (m == ModelChoice::MD ? 'M' : 'D');
      return json{{"policy", "pattern"}, {"word", w}};
    }
    case Kind::SeededRandom:
      return json{{"policy", "seeded_random"}, {"seed", seed_}};
  }
  throw std::logic_error("unreachable");
}

MixPolicy MixPolicy::from_json(const json& j) {
  const std::string policy = j.at("policy").get<std::string>();
  if (policy == "pure_md") return pure_md();
  if (policy == "pure_da") return pure_da();
  if (policy == "pattern") {
    std::vector<ModelChoice> word;
    for (char c : j.at("word").get<std::string>()) {
      if (c == 'M' || c == 'm')
        word.push_back(ModelChoice::MD);
      else if (c == 'D' || c == 'd')
        word.push_back(ModelChoice::DA);
      else
        throw std::invalid_argument("mix pattern: word must contain only M/D");
    }
    return pattern(std::move(word));
  }
  if (policy == "seeded_random") return seeded_random(j.at("seed").get<std::uint64_t>());
  throw std::invalid_argument("mix: unknown policy " + policy);
}

std::string to_string(ModelChoice m) { return m == ModelChoice::MD ? "MD" : "DA"; }

}  // namespace fom
