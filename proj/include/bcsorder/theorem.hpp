#pragma once

// Monte-Carlo checks of the predictor-quality bounds: correlation between a
// noisy cost and its noise-free part, and expected improvement of annealed
// orderings as a function of predictor error.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcsorder/anf.hpp"
#include "bcsorder/annealer.hpp"
#include "bcsorder/predictor.hpp"

namespace bcsorder {

struct Lemma1Row {
  double ratio = 0.0;  // e_hat / sigma
  double rho_empirical = 0.0;
  double rho_predicted = 0.0;
};

/// For each e_hat draws f ~ N(0, sigma^2 - e_hat^2), eps ~ N(0, e_hat^2),
/// tau = f + eps and compares corr(tau, f) against sqrt(1 - e_hat^2/sigma^2).
/// Throws DomainError when e_hat >= sigma or e_hat < 0, InputError for
/// samples < 10000.
std::vector<Lemma1Row> verify_lemma1(double sigma, const std::vector<double>& e_hats, std::size_t samples,
                                     std::uint64_t seed);

std::string lemma1_to_json(const std::vector<Lemma1Row>& rows);
std::string lemma1_to_csv(const std::vector<Lemma1Row>& rows);

struct ImprovementConfig {
  /// Standard deviations of Gaussian noise added to predictions (target
  /// domain). Noise is a fixed function of (seed, level, ordering).
  std::vector<double> noise_levels{0.0, 0.5, 1.0, 2.0};
  /// Also run a predictor that returns pure noise with this standard
  /// deviation scaled by the baseline sigma; 0 disables it.
  double pure_noise_scale = 1.0;
  unsigned baseline_orderings = 20;
  SaConfig sa;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct LevelResult {
  std::string label;             // "noise=<s>" or "pure-noise"
  double injected = 0.0;         // injected noise standard deviation
  double e_hat = 0.0;            // effective predictor RMSE
  double rho = 0.0;              // sqrt(max(0, 1 - e_hat^2 / sigma^2))
  std::vector<double> delta_nodes;  // per system: baseline median - SA node count
  std::vector<double> delta_target; // same, in the target domain
  double mean_delta_nodes = 0.0;
  double ci_low = 0.0;           // 95% t interval on mean_delta_nodes
  double ci_high = 0.0;
  double t_stat = 0.0;
  double mean_delta_target = 0.0;
  double median_ratio = 0.0;     // median over systems of SA nodes / baseline median
  std::optional<double> c_empirical;  // mean_delta_target / (sigma * rho)
};

struct TheoremReport {
  std::size_t systems = 0;
  double sigma_tau = 0.0;  // sd of baseline costs, target domain, pooled
  double mu_b = 0.0;       // mean of baseline costs, target domain
  double sigma_nodes = 0.0;
  double mu_b_nodes = 0.0;
  double model_e_hat = 0.0;
  std::vector<LevelResult> levels;
  double trend_spearman = 0.0;  // e_hat vs mean improvement over the noise levels
};

/// Throws InputError for an empty corpus, an untrained model or a
/// feature-length mismatch.
TheoremReport verify_improvement(const std::vector<BoolSystem>& corpus, const GbtModel& model,
                                 const ResidualStats& stats, const ImprovementConfig& cfg);

std::string theorem_to_json(const TheoremReport& r);
/// One row per level: label,injected,e_hat,rho,mean_delta_nodes,ci_low,ci_high,t_stat,mean_delta_target,median_ratio.
std::string theorem_to_csv(const TheoremReport& r);

}  // namespace bcsorder
