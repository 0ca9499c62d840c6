#include "bcsorder/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "bcsorder/errors.hpp"
#include "bcsorder/solver.hpp"
#include "json.hpp"

namespace bcsorder {

void SaConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must be in (0, 1)");
  if (beta < 0.0) throw InputError("beta must be >= 0");
  if (window < 2) throw InputError("residual window must be at least 2");
  if (iterations < 0) throw InputError("iterations must be >= 0");
  if (pool && *pool < 1) throw InputError("candidate pool must be at least 1");
  if (!(epsilon_explore >= 0.0 && epsilon_explore <= 1.0)) throw InputError("epsilon_explore must be in [0, 1]");
  if (t0 && !(*t0 > 0.0)) throw InputError("initial temperature must be positive");
}

unsigned SaConfig::pool_size(unsigned n) const {
  const unsigned pairs = n * (n - 1) / 2;
  return std::min(pool.value_or(32U), pairs);
}

CostField CostField::batched(Many many) {
  CostField f;
  f.many_ = std::move(many);
  return f;
}

double CostField::operator()(const Ordering& o) const {
  if (one_) return one_(o);
  double v = 0.0;
  many_(std::span<const Ordering>(&o, 1), std::span<double>(&v, 1));
  return v;
}

void CostField::operator()(std::span<const Ordering> os, std::span<double> out) const {
  if (many_) {
    many_(os, out);
    return;
  }
  for (std::size_t i = 0; i < os.size(); ++i) out[i] = one_(os[i]);
}

double accept_probability(double delta_e, double t) {
  if (!(t > 0.0)) throw DomainError("temperature must be positive");
  if (delta_e <= 0.0) return 1.0;
  return std::exp(-delta_e / t);
}

double adaptive_cool(double t, const SaConfig& cfg, double window_var) {
  if (!(t > 0.0)) throw DomainError("temperature must be positive");
  if (window_var < 0.0) throw DomainError("residual variance must be non-negative");
  return cfg.alpha * t * (1.0 + cfg.beta * window_var);
}

std::vector<Candidate> guided_neighbors(const Ordering& current, const CostField& field, unsigned q, Rng& rng) {
  const unsigned n = current.size();
  std::vector<std::pair<unsigned, unsigned>> pairs;
  for (unsigned i = 1; i <= n; ++i) {
    for (unsigned j = i + 1; j <= n; ++j) pairs.emplace_back(i, j);
  }
  const std::size_t take = std::min<std::size_t>(q, pairs.size());
  for (std::size_t k = 0; k < take; ++k) {
    std::swap(pairs[k], pairs[k + uniform_below(rng, pairs.size() - k)]);
  }
  std::vector<Ordering> moved;
  moved.reserve(take);
  for (std::size_t k = 0; k < take; ++k) moved.push_back(swap_neighbor(current, pairs[k].first, pairs[k].second));
  std::vector<double> costs(take);
  field(moved, costs);
  std::vector<Candidate> out;
  out.reserve(take);
  for (std::size_t k = 0; k < take; ++k) {
    out.push_back({pairs[k].first, pairs[k].second, std::move(moved[k]), costs[k]});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  return out;
}

CostField predictor_field(const BoolSystem& s, const GbtModel& model) {
  if (model.n_features != s.n) {
    throw InputError("model expects " + std::to_string(model.n_features) + " features but the system has n=" +
                     std::to_string(s.n));
  }
  // The renamed system's spectrum is the original spectrum permuted.
  return CostField::batched([base = spectrum(s), &model](std::span<const Ordering> os, std::span<double> out) {
    std::vector<std::vector<double>> xs;
    xs.reserve(os.size());
    for (const Ordering& o : os) xs.push_back(permute_spectrum(base, o));
    const std::vector<double> ys = model.predict_batch(xs);
    std::copy(ys.begin(), ys.end(), out.begin());
  });
}

namespace {

double sample_variance(const std::deque<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

double calibrate_t0(unsigned n, const CostField& field, std::uint64_t seed) {
  constexpr int kSamples = 30;
  std::vector<double> costs;
  for (int i = 0; i < kSamples; ++i) costs.push_back(field(random_ordering(n, mix_seed(seed, 100 + i))));
  const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / kSamples;
  double ss = 0.0;
  for (const double c : costs) ss += (c - mean) * (c - mean);
  return std::max(std::sqrt(ss / (kSamples - 1)), 1e-6);
}

}  // namespace

OptimizeResult anneal(unsigned n, const CostField& field, std::span<const double> residuals, const SaConfig& cfg,
                      const SpotCheck& spot_check) {
  cfg.validate();
  if (n < 2) throw InputError("annealing needs at least 2 variables");
  const unsigned q = cfg.pool_size(n);

  OptimizeResult out;
  out.t0 = cfg.t0 ? *cfg.t0 : calibrate_t0(n, field, cfg.seed);
  out.initial_ordering = random_ordering(n, mix_seed(cfg.seed, 1));
  out.initial_cost = field(out.initial_ordering);
  out.evaluations = 1;
  out.best_ordering = out.initial_ordering;
  out.predicted_cost = out.initial_cost;

  Rng rng(cfg.seed);
  Rng resample(mix_seed(cfg.seed, 2));
  std::deque<double> window;
  auto draw_residual = [&] { return residuals[uniform_below(resample, residuals.size())]; };
  if (!residuals.empty()) {
    for (std::size_t i = 0; i < cfg.window; ++i) window.push_back(draw_residual());
  }

  Ordering current = out.initial_ordering;
  double current_cost = out.initial_cost;
  double t = out.t0;
  out.trace.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int k = 0; k < cfg.iterations; ++k) {
    std::vector<Candidate> pool = guided_neighbors(current, field, q, rng);
    out.evaluations += pool.size();
    std::size_t pick = 0;
    if (cfg.epsilon_explore > 0.0 && uniform01(rng) < cfg.epsilon_explore) {
      pick = static_cast<std::size_t>(uniform_below(rng, pool.size()));
    }
    Candidate& proposal = pool[pick];

    TraceRecord rec;
    rec.iteration = k;
    rec.ordering_hash = current.hash();
    rec.swap_i = proposal.i;
    rec.swap_j = proposal.j;
    rec.delta_e = proposal.cost - current_cost;
    rec.temperature = t;
    const double p = accept_probability(rec.delta_e, t);
    rec.accepted = p >= 1.0 || uniform01(rng) < p;
    if (rec.accepted) {
      current = std::move(proposal.ordering);
      current_cost = proposal.cost;
      if (current_cost < out.predicted_cost) {
        out.predicted_cost = current_cost;
        out.best_ordering = current;
      }
    }

    if (cfg.spot_check_every > 0 && spot_check && (k + 1) % cfg.spot_check_every == 0) {
      window.push_back(spot_check(out.best_ordering, out.predicted_cost));
      ++out.spot_checks;
      while (window.size() > cfg.window) window.pop_front();
    } else if (cfg.spot_check_every == 0 && !residuals.empty()) {
      window.push_back(draw_residual());
      window.pop_front();
    }
    t = adaptive_cool(t, cfg, cfg.beta > 0.0 ? sample_variance(window) : 0.0);
    // Guard against underflow so T_k stays strictly positive.
    t = std::max(t, std::numeric_limits<double>::min());

    rec.predicted_cost = current_cost;
    rec.best_cost = out.predicted_cost;
    out.trace.push_back(rec);
  }
  return out;
}

OptimizeResult optimize(const BoolSystem& s, const GbtModel& model, const ResidualStats& stats, const SaConfig& cfg) {
  const CostField field = predictor_field(s, model);
  SpotCheck check = [&](const Ordering& o, double predicted) {
    SolveOptions opts;
    opts.keep_sets = false;
    const SolveResult r = solve_with_ordering(s, o, opts);
    return apply_transform(model.transform, static_cast<double>(r.cost.node_count)) - predicted;
  };
  return anneal(s.n, field, stats.residuals, cfg, check);
}

std::string trace_record_to_json(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["iteration"] = r.iteration;
  j["ordering_hash"] = r.ordering_hash;
  j["candidate"] = {r.swap_i, r.swap_j};
  j["delta_e"] = r.delta_e;
  j["temperature"] = r.temperature;
  j["accepted"] = r.accepted;
  j["predicted_cost"] = r.predicted_cost;
  j["best_cost"] = r.best_cost;
  return j.dump();
}

std::string optimize_result_to_json(const OptimizeResult& r) {
  nlohmann::ordered_json j;
  j["best_ordering"] = std::vector<unsigned>(r.best_ordering.perm().begin(), r.best_ordering.perm().end());
  j["predicted_cost"] = r.predicted_cost;
  j["initial_ordering"] = std::vector<unsigned>(r.initial_ordering.perm().begin(), r.initial_ordering.perm().end());
  j["initial_cost"] = r.initial_cost;
  j["t0"] = r.t0;
  j["iterations"] = r.trace.size();
  j["evaluations"] = r.evaluations;
  j["spot_checks"] = r.spot_checks;
  return j.dump();
}

}  // namespace bcsorder
