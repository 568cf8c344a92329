#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fom/space.hpp"

namespace fom {

enum class ModelChoice { MD, DA };

// Thrown by weighted-averages parameters when the queried subgradient is
// zero: the current test point is already optimal.
struct OptimalPointDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// beta-hat auxiliary sequence: bh(-1) = bh(0) = 1, bh(k+1) = bh(k) + 1/bh(k).
// Memoized; thread-safe.
double beta_hat(long k);

// Generator of per-step weight/scaling parameters (lambda_k, beta_k), k >= 0,
// plus the initial scaling beta_{-1}. Immutable descriptor.
class Schedule {
 public:
  enum class Kind {
    SimpleAverages,    // lambda = 1, beta_k = gamma * bh(k)
    WeightedAverages,  // lambda = 1/||g_k||_*, beta_k = bh(k)/(rho*sqrt(sigma))
    ClassicSmooth,     // lambda = 1, beta = L/sigma
    FastSmooth,        // lambda_k = (k+1)/2, beta = L/sigma
    TsengLambda,       // lambda_0 = 1, lambda_{k+1} = (1+sqrt(1+4 lambda_k^2))/2, beta = L/sigma
    MdmClassic,        // beta = 1; lambda from a rule or explicit list
    Custom,            // explicit user sequences
  };

  static Schedule simple_averages(double gamma);
  static Schedule weighted_averages(double rho, double sigma);
  static Schedule classic_smooth(double L, double sigma);
  static Schedule fast_smooth(double L, double sigma);
  static Schedule tseng_lambda(double L, double sigma);
  // lambda_k = r / sqrt(k+1)
  static Schedule mdm_classic(double r = 1.0);
  static Schedule mdm_classic_list(std::vector<double> lambdas);
  static Schedule custom(std::vector<double> lambdas, double beta_init,
                         std::vector<double> betas);

  Kind kind() const { return kind_; }
  bool needs_grad_norm() const { return kind_ == Kind::WeightedAverages; }
  double beta_init() const;  // beta_{-1}
  // (lambda_k, beta_k); weighted averages require the dual norm of g_k.
  std::pair<double, double> next_params(long k,
                                        std::optional<double> grad_dual_norm = {}) const;

  double gamma() const { return gamma_; }
  double rho() const { return rho_; }
  double lipschitz() const { return lipschitz_; }
  double sigma() const { return sigma_; }

  nlohmann::json to_json() const;
  static Schedule from_json(const nlohmann::json& j, double sigma,
                            std::optional<double> problem_lipschitz);

 private:
  Schedule() = default;
  Kind kind_ = Kind::SimpleAverages;
  double gamma_ = 1.0;
  double rho_ = 1.0;
  double lipschitz_ = 0.0;
  double sigma_ = 1.0;
  double mdm_rate_ = 1.0;
  std::vector<double> lambdas_;
  std::vector<double> betas_;  // custom: betas_[0] is beta_{-1}
  double tseng_lambda_at(long k) const;
};

// Deterministic MD/DA choice per step.
class MixPolicy {
 public:
  enum class Kind { PureMd, PureDa, Pattern, SeededRandom };

  static MixPolicy pure_md();
  static MixPolicy pure_da();
  static MixPolicy pattern(std::vector<ModelChoice> word);
  static MixPolicy seeded_random(std::uint64_t seed);

  Kind kind() const { return kind_; }
  ModelChoice choice(long k) const;

  nlohmann::json to_json() const;
  static MixPolicy from_json(const nlohmann::json& j);

 private:
  MixPolicy() = default;
  Kind kind_ = Kind::PureMd;
  std::vector<ModelChoice> word_;
  std::uint64_t seed_ = 0;
};

std::string to_string(ModelChoice m);

}  // namespace fom
