#include "bcsorder/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "bcsorder/errors.hpp"
#include "bcsorder/random.hpp"
#include "json.hpp"

namespace bcsorder {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

Points seed_plus_plus(const Points& pts, int k, Rng& rng) {
  Points centers;
  centers.push_back(pts[uniform_below(rng, pts.size())]);
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = sq_dist(pts[i], centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = uniform_below(rng, pts.size());
    } else {
      double u = uniform01(rng) * total;
      for (pick = 0; pick + 1 < pts.size(); ++pick) {
        u -= d2[pick];
        if (u < 0.0) break;
      }
    }
    centers.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], sq_dist(pts[i], centers.back()));
  }
  return centers;
}

KMeansResult lloyd(const Points& pts, Points centers) {
  const std::size_t k = centers.size();
  const std::size_t dim = pts[0].size();
  KMeansResult res;
  res.labels.assign(pts.size(), -1);
  constexpr int kMaxIter = 300;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double best_d = sq_dist(pts[i], centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(pts[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (res.labels[i] != best) {
        res.labels[i] = best;
        changed = true;
      }
    }
    Points sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto c = static_cast<std::size_t>(res.labels[i]);
      ++counts[c];
      for (std::size_t f = 0; f < dim; ++f) sums[c][f] += pts[i][f];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          const double d = sq_dist(pts[i], centers[static_cast<std::size_t>(res.labels[i])]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[c] = pts[far];
        res.labels[far] = static_cast<int>(c);
        changed = true;
        continue;
      }
      for (std::size_t f = 0; f < dim; ++f) centers[c][f] = sums[c][f] / static_cast<double>(counts[c]);
    }
    if (!changed) break;
  }
  res.inertia = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    res.inertia += sq_dist(pts[i], centers[static_cast<std::size_t>(res.labels[i])]);
  }
  res.centroids = std::move(centers);
  return res;
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

std::vector<ClusterCost> cluster_costs(std::span<const int> labels, int k, std::span<const double> cost) {
  std::vector<std::vector<double>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) groups[static_cast<std::size_t>(labels[i])].push_back(cost[i]);
  std::vector<ClusterCost> out;
  for (const auto& g : groups) {
    ClusterCost c;
    c.size = g.size();
    if (!g.empty()) c.cost_mean = mean_of(g);
    if (g.size() > 1) {
      double ss = 0.0;
      for (const double x : g) ss += (x - c.cost_mean) * (x - c.cost_mean);
      c.cost_std = std::sqrt(ss / static_cast<double>(g.size() - 1));
    }
    out.push_back(c);
  }
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

nlohmann::ordered_json clusters_json(const std::vector<ClusterCost>& cs) {
  auto arr = nlohmann::ordered_json::array();
  for (const ClusterCost& c : cs) {
    nlohmann::ordered_json j;
    j["size"] = c.size;
    j["cost_mean"] = c.cost_mean;
    j["cost_std"] = c.cost_std;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace

KMeansResult kmeans(const Points& points, int k, int restarts, std::uint64_t seed) {
  if (k < 1) throw InputError("k must be at least 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw InputError("k-means needs at least k=" + std::to_string(k) + " points, got " +
                     std::to_string(points.size()));
  }
  for (const auto& p : points) {
    if (p.size() != points[0].size()) throw InputError("points have unequal dimension");
  }
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult run = lloyd(points, seed_plus_plus(points, k, rng));
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

double silhouette_mean(const Points& points, std::span<const int> labels, int k) {
  if (points.size() != labels.size()) throw InputError("labels and points differ in length");
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (const int l : labels) ++sizes[static_cast<std::size_t>(l)];
  double total = 0.0;
  std::vector<double> sum_to(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] <= 1) continue;
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j != i) sum_to[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist(points[i], points[j]));
    }
    const double a = sum_to[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum_to.size(); ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(points.size());
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("correlation inputs differ in length");
  if (x.size() < 3) throw InputError("correlation needs at least 3 samples");
  Correlation c;
  c.r = pearson_r(x, y);
  const double dof = static_cast<double>(x.size() - 2);
  if (std::abs(c.r) >= 1.0) {
    c.p_value = 0.0;
  } else {
    const double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
    const boost::math::students_t dist(dof);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return c;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("correlation inputs differ in length");
  if (x.size() < 2) throw InputError("rank correlation needs at least 2 samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson_r(rx, ry);
}

AnalysisReport analyze(const std::vector<DatasetRecord>& records, const AnalyzeOptions& opts) {
  if (records.size() < static_cast<std::size_t>(std::max(opts.k, 3))) {
    throw InputError("analysis needs at least " + std::to_string(std::max(opts.k, 3)) + " records, got " +
                     std::to_string(records.size()));
  }
  Points spectra;
  std::vector<double> cost;
  for (const DatasetRecord& r : records) {
    spectra.push_back(r.spectrum);
    cost.push_back(r.target);
  }
  AnalysisReport rep;
  rep.k = opts.k;
  rep.records = records.size();
  const KMeansResult km = kmeans(spectra, opts.k, opts.restarts, opts.seed);
  rep.silhouette_mean = silhouette_mean(spectra, km.labels, opts.k);
  rep.clusters = cluster_costs(km.labels, opts.k, cost);

  const std::size_t dim = spectra[0].size();
  std::vector<double> column(records.size());
  for (std::size_t f = 0; f < dim; ++f) {
    for (std::size_t i = 0; i < records.size(); ++i) column[i] = spectra[i][f];
    rep.feature_correlations.push_back(pearson(column, cost));
  }

  Points cost_points;
  for (const double c : cost) cost_points.push_back({c});
  const KMeansResult by_cost = kmeans(cost_points, opts.k, opts.restarts, mix_seed(opts.seed, 7));
  rep.cost_clusters = cluster_costs(by_cost.labels, opts.k, cost);
  double corr_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      if (by_cost.labels[i] != by_cost.labels[j]) continue;
      corr_sum += pearson_r(spectra[i], spectra[j]);
      ++pairs;
    }
  }
  rep.intra_cluster_spectrum_corr = pairs ? corr_sum / static_cast<double>(pairs) : 0.0;
  return rep;
}

std::string analysis_to_json(const AnalysisReport& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["records"] = r.records;
  j["silhouette_mean"] = r.silhouette_mean;
  j["clusters"] = clusters_json(r.clusters);
  auto corr = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < r.feature_correlations.size(); ++f) {
    nlohmann::ordered_json c;
    c["feature"] = f;
    c["r"] = r.feature_correlations[f].r;
    c["p_value"] = r.feature_correlations[f].p_value;
    corr.push_back(c);
  }
  j["feature_correlations"] = corr;
  j["cost_clusters"] = clusters_json(r.cost_clusters);
  j["intra_cluster_spectrum_corr"] = r.intra_cluster_spectrum_corr;
  return j.dump(2);
}

std::string correlations_to_csv(const AnalysisReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "feature,r,p_value\n";
  for (std::size_t f = 0; f < r.feature_correlations.size(); ++f) {
    out << f << ',' << r.feature_correlations[f].r << ',' << r.feature_correlations[f].p_value << '\n';
  }
  return out.str();
}

std::string clusters_to_csv(const AnalysisReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "view,cluster,size,cost_mean,cost_std\n";
  auto rows = [&](const char* view, const std::vector<ClusterCost>& cs) {
    for (std::size_t c = 0; c < cs.size(); ++c) {
      out << view << ',' << c << ',' << cs[c].size << ',' << cs[c].cost_mean << ',' << cs[c].cost_std << '\n';
    }
  };
  rows("spectrum", r.clusters);
  rows("cost", r.cost_clusters);
  return out.str();
}

}  // namespace bcsorder
