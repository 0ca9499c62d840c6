#pragma once

// Simulated annealing over variable orderings with a learned cost field,
// predictor-guided neighbor ranking and confidence-adaptive cooling
//   T_{k+1} = alpha * T_k * (1 + beta * Var(recent residuals)).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "bcsorder/anf.hpp"
#include "bcsorder/features.hpp"
#include "bcsorder/ordering.hpp"
#include "bcsorder/predictor.hpp"
#include "bcsorder/random.hpp"

namespace bcsorder {

struct SaConfig {
  /// Initial temperature; when unset, the sample standard deviation of the
  /// cost field over 30 seeded random orderings (floor 1e-6).
  std::optional<double> t0;
  double alpha = 0.95;
  double beta = 0.5;
  std::size_t window = 20;
  int iterations = 500;
  /// Candidate swaps per iteration; default min(32, n(n-1)/2).
  std::optional<unsigned> pool;
  double epsilon_explore = 0.1;
  /// Run the true solver on the best ordering every `spot_check_every`
  /// iterations and feed genuine residuals into the cooling window; 0 = off.
  unsigned spot_check_every = 0;
  std::uint64_t seed = 0;

  void validate() const;
  unsigned pool_size(unsigned n) const;
};

/// Cost of an ordering (lower is better). Wraps either a per-ordering
/// function or a batch evaluator; the annealer scores each candidate pool
/// with one batch call.
class CostField {
 public:
  using One = std::function<double(const Ordering&)>;
  using Many = std::function<void(std::span<const Ordering>, std::span<double>)>;

  CostField() = default;
  template <typename F>
    requires std::is_invocable_r_v<double, F, const Ordering&>
  CostField(F f) : one_(std::move(f)) {}

  static CostField batched(Many many);

  double operator()(const Ordering& o) const;
  void operator()(std::span<const Ordering> os, std::span<double> out) const;
  explicit operator bool() const noexcept { return one_ || many_; }

 private:
  One one_;
  Many many_;
};

struct Candidate {
  unsigned i = 0;  // 1-based positions, i < j
  unsigned j = 0;
  Ordering ordering;
  double cost = 0.0;
};

struct TraceRecord {
  int iteration = 0;
  std::uint64_t ordering_hash = 0;
  unsigned swap_i = 0;
  unsigned swap_j = 0;
  double delta_e = 0.0;
  double temperature = 0.0;
  bool accepted = false;
  double predicted_cost = 0.0;  // cost of the current state after the step
  double best_cost = 0.0;
};

struct OptimizeResult {
  Ordering best_ordering;
  double predicted_cost = 0.0;
  Ordering initial_ordering;
  double initial_cost = 0.0;
  double t0 = 0.0;
  std::vector<TraceRecord> trace;
  std::uint64_t evaluations = 0;  // cost-field calls inside the search loop
  std::uint64_t spot_checks = 0;
};

/// 1 for delta_e <= 0, else exp(-delta_e / t). Throws DomainError for t <= 0.
double accept_probability(double delta_e, double t);

/// alpha * t * (1 + beta * window_var). Throws DomainError for t <= 0 or
/// window_var < 0.
double adaptive_cool(double t, const SaConfig& cfg, double window_var);

/// Samples min(q, n(n-1)/2) distinct transpositions and returns them sorted
/// by cost ascending (largest predicted improvement first); ties by (i, j).
std::vector<Candidate> guided_neighbors(const Ordering& current, const CostField& field, unsigned q, Rng& rng);

/// Cost field backed by a model: predict(spectrum(apply_ordering(s, sigma))).
CostField predictor_field(const BoolSystem& s, const GbtModel& model);

/// Residuals feeding the cooling window during a run. Returns the genuine
/// residual (true - predicted, target domain) for an ordering.
using SpotCheck = std::function<double(const Ordering&, double predicted)>;

/// Anneals over `field`. `residuals` seeds the cooling window by seeded
/// resampling; `spot_check` is consulted when cfg.spot_check_every > 0.
OptimizeResult anneal(unsigned n, const CostField& field, std::span<const double> residuals, const SaConfig& cfg,
                      const SpotCheck& spot_check = {});

/// Annealing with the model as cost field. Spot checks (when enabled) run
/// the solver on the current best ordering.
OptimizeResult optimize(const BoolSystem& s, const GbtModel& model, const ResidualStats& stats, const SaConfig& cfg);

std::string optimize_result_to_json(const OptimizeResult& r);
std::string trace_record_to_json(const TraceRecord& r);

}  // namespace bcsorder
