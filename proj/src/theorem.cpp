#include "bcsorder/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "bcsorder/analysis.hpp"
#include "bcsorder/errors.hpp"
#include "bcsorder/parallel.hpp"
#include "bcsorder/random.hpp"
#include "bcsorder/solver.hpp"
#include "json.hpp"

namespace bcsorder {

std::vector<Lemma1Row> verify_lemma1(double sigma, const std::vector<double>& e_hats, std::size_t samples,
                                     std::uint64_t seed) {
  if (samples < 10000) throw InputError("Monte-Carlo check needs at least 10000 samples");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  std::vector<Lemma1Row> out;
  std::vector<double> f(samples), tau(samples);
  for (std::size_t l = 0; l < e_hats.size(); ++l) {
    const double e = e_hats[l];
    if (e < 0.0 || e >= sigma) throw DomainError("e_hat must lie in [0, sigma)");
    Rng rng(mix_seed(seed, l));
    const double sd_f = std::sqrt(sigma * sigma - e * e);
    for (std::size_t i = 0; i < samples; ++i) {
      f[i] = sd_f * standard_normal(rng);
      tau[i] = f[i] + e * standard_normal(rng);
    }
    Lemma1Row row;
    row.ratio = e / sigma;
    row.rho_predicted = std::sqrt(1.0 - row.ratio * row.ratio);
    row.rho_empirical = e == 0.0 ? 1.0 : pearson(tau, f).r;
    out.push_back(row);
  }
  return out;
}

std::string lemma1_to_json(const std::vector<Lemma1Row>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const Lemma1Row& r : rows) {
    nlohmann::ordered_json j;
    j["ratio"] = r.ratio;
    j["rho_empirical"] = r.rho_empirical;
    j["rho_predicted"] = r.rho_predicted;
    j["abs_error"] = std::abs(r.rho_empirical - r.rho_predicted);
    arr.push_back(j);
  }
  return arr.dump(2);
}

std::string lemma1_to_csv(const std::vector<Lemma1Row>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "ratio,rho_empirical,rho_predicted\n";
  for (const Lemma1Row& r : rows) out << r.ratio << ',' << r.rho_empirical << ',' << r.rho_predicted << '\n';
  return out.str();
}

namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

double sample_sd(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double noise_at(std::uint64_t stream, const Ordering& o) {
  Rng rng(mix_seed(stream, o.hash()));
  return standard_normal(rng);
}

std::uint64_t solve_nodes(const BoolSystem& s, const Ordering& o) {
  SolveOptions opts;
  opts.keep_sets = false;
  return solve_with_ordering(s, o, opts).cost.node_count;
}

void summarize(LevelResult& lv, const std::vector<double>& base_nodes, const std::vector<double>& sa_nodes,
               double sigma) {
  std::vector<double> ratios;
  for (std::size_t i = 0; i < base_nodes.size(); ++i) ratios.push_back(sa_nodes[i] / base_nodes[i]);
  lv.median_ratio = median(ratios);
  const std::size_t k = lv.delta_nodes.size();
  lv.mean_delta_nodes = mean(lv.delta_nodes);
  lv.mean_delta_target = mean(lv.delta_target);
  const double sd = sample_sd(lv.delta_nodes, lv.mean_delta_nodes);
  if (k >= 2 && sd > 0.0) {
    const double se = sd / std::sqrt(static_cast<double>(k));
    lv.t_stat = lv.mean_delta_nodes / se;
    const boost::math::students_t dist(static_cast<double>(k - 1));
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    lv.ci_low = lv.mean_delta_nodes - q * se;
    lv.ci_high = lv.mean_delta_nodes + q * se;
  } else {
    lv.t_stat = 0.0;
    lv.ci_low = lv.ci_high = lv.mean_delta_nodes;
  }
  if (lv.rho > 0.0 && sigma > 0.0) lv.c_empirical = lv.mean_delta_target / (sigma * lv.rho);
}

}  // namespace

TheoremReport verify_improvement(const std::vector<BoolSystem>& corpus, const GbtModel& model,
                                 const ResidualStats& stats, const ImprovementConfig& cfg) {
  if (corpus.empty()) throw InputError("verification corpus is empty");
  if (model.trees.empty()) throw InputError("model is untrained");
  if (cfg.baseline_orderings < 1) throw InputError("baseline needs at least one ordering");
  for (const BoolSystem& s : corpus) {
    if (s.n != model.n_features) throw InputError("corpus system size does not match the model");
  }
  cfg.sa.validate();
  const std::size_t count = corpus.size();
  const unsigned r = cfg.baseline_orderings;

  std::vector<std::vector<double>> base(count, std::vector<double>(r));
  parallel_for(count * r, cfg.jobs, [&](std::size_t t) {
    const std::size_t i = t / r;
    const std::size_t o = t % r;
    const Ordering ord = random_ordering(corpus[i].n, mix_seed(mix_seed(cfg.seed, i), 500 + o));
    base[i][o] = static_cast<double>(solve_nodes(corpus[i], ord));
  });

  TheoremReport rep;
  rep.systems = count;
  rep.model_e_hat = stats.rmse;
  std::vector<double> pooled_target, pooled_nodes;
  std::vector<double> base_median(count), base_median_target(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> tgt;
    for (const double c : base[i]) {
      pooled_nodes.push_back(c);
      tgt.push_back(apply_transform(model.transform, c));
      pooled_target.push_back(tgt.back());
    }
    base_median[i] = median(base[i]);
    base_median_target[i] = median(tgt);
  }
  rep.mu_b = mean(pooled_target);
  rep.sigma_tau = sample_sd(pooled_target, rep.mu_b);
  rep.mu_b_nodes = mean(pooled_nodes);
  rep.sigma_nodes = sample_sd(pooled_nodes, rep.mu_b_nodes);

  struct Level {
    std::string label;
    double injected;
    double e_hat;
    bool pure;
  };
  std::vector<Level> levels;
  for (const double s : cfg.noise_levels) {
    if (s < 0.0) throw InputError("noise levels must be non-negative");
    std::ostringstream label;
    label << "noise=" << s;
    levels.push_back({label.str(), s, std::sqrt(stats.rmse * stats.rmse + s * s), false});
  }
  if (cfg.pure_noise_scale > 0.0) {
    const double s = cfg.pure_noise_scale * rep.sigma_tau;
    levels.push_back({"pure-noise", s, std::sqrt(rep.sigma_tau * rep.sigma_tau + s * s), true});
  }

  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Level& level = levels[l];
    const std::uint64_t stream = mix_seed(cfg.seed, 9000 + l);
    std::vector<double> sa_nodes(count);
    parallel_for(count, cfg.jobs, [&](std::size_t i) {
      const BoolSystem& s = corpus[i];
      CostField field;
      if (level.pure) {
        field = [&, stream](const Ordering& o) { return rep.mu_b + level.injected * noise_at(stream, o); };
      } else {
        CostField clean = predictor_field(s, model);
        field = CostField::batched([clean, &level, stream](std::span<const Ordering> os, std::span<double> out) {
          clean(os, out);
          if (level.injected <= 0.0) return;
          for (std::size_t k = 0; k < os.size(); ++k) out[k] += level.injected * noise_at(stream, os[k]);
        });
      }
      SaConfig sa = cfg.sa;
      sa.seed = mix_seed(cfg.seed, 1000 + i);
      sa.spot_check_every = 0;
      const OptimizeResult res = anneal(s.n, field, stats.residuals, sa);
      sa_nodes[i] = static_cast<double>(solve_nodes(s, res.best_ordering));
    });
    LevelResult lv;
    lv.label = level.label;
    lv.injected = level.injected;
    lv.e_hat = level.e_hat;
    const double ratio = rep.sigma_tau > 0.0 ? level.e_hat / rep.sigma_tau : 1.0;
    lv.rho = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    for (std::size_t i = 0; i < count; ++i) {
      lv.delta_nodes.push_back(base_median[i] - sa_nodes[i]);
      lv.delta_target.push_back(base_median_target[i] - apply_transform(model.transform, sa_nodes[i]));
    }
    summarize(lv, base_median, sa_nodes, rep.sigma_tau);
    rep.levels.push_back(std::move(lv));
  }

  if (rep.levels.size() >= 2) {
    std::vector<double> e, gain;
    for (const LevelResult& lv : rep.levels) {
      e.push_back(lv.e_hat);
      gain.push_back(lv.mean_delta_nodes);
    }
    rep.trend_spearman = spearman(e, gain);
  }
  return rep;
}

std::string theorem_to_json(const TheoremReport& r) {
  nlohmann::ordered_json j;
  j["systems"] = r.systems;
  j["sigma_tau"] = r.sigma_tau;
  j["mu_b"] = r.mu_b;
  j["sigma_nodes"] = r.sigma_nodes;
  j["mu_b_nodes"] = r.mu_b_nodes;
  j["model_e_hat"] = r.model_e_hat;
  auto levels = nlohmann::ordered_json::array();
  for (const LevelResult& lv : r.levels) {
    nlohmann::ordered_json l;
    l["label"] = lv.label;
    l["injected"] = lv.injected;
    l["e_hat"] = lv.e_hat;
    l["rho"] = lv.rho;
    l["mean_delta_nodes"] = lv.mean_delta_nodes;
    l["ci95"] = {lv.ci_low, lv.ci_high};
    l["t_stat"] = lv.t_stat;
    l["mean_delta_target"] = lv.mean_delta_target;
    l["median_ratio"] = lv.median_ratio;
    l["c_empirical"] = lv.c_empirical ? nlohmann::ordered_json(*lv.c_empirical) : nlohmann::ordered_json();
    l["delta_nodes"] = lv.delta_nodes;
    levels.push_back(l);
  }
  j["levels"] = levels;
  j["trend_spearman"] = r.trend_spearman;
  return j.dump(2);
}

std::string theorem_to_csv(const TheoremReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "label,injected,e_hat,rho,mean_delta_nodes,ci_low,ci_high,t_stat,mean_delta_target,median_ratio\n";
  for (const LevelResult& lv : r.levels) {
    out << lv.label << ',' << lv.injected << ',' << lv.e_hat << ',' << lv.rho << ',' << lv.mean_delta_nodes << ','
        << lv.ci_low << ',' << lv.ci_high << ',' << lv.t_stat << ',' << lv.mean_delta_target << ','
        << lv.median_ratio << '\n';
  }
  return out.str();
}

}  // namespace bcsorder
