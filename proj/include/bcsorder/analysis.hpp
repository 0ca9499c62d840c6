#pragma once

// Spectrum/cost statistics over a collected dataset: k-means clustering of
// spectra, silhouette, per-cluster cost, per-feature Pearson correlations.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcsorder/dataset.hpp"

namespace bcsorder {

using Points = std::vector<std::vector<double>>;

struct KMeansResult {
  std::vector<int> labels;
  Points centroids;
  double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` by inertia.
/// Throws InputError when there are fewer points than clusters.
KMeansResult kmeans(const Points& points, int k, int restarts, std::uint64_t seed);

/// Mean silhouette coefficient; points in singleton clusters score 0.
double silhouette_mean(const Points& points, std::span<const int> labels, int k);

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, t-distribution with n-2 dof
};

/// r = 0, p = 1 when either input is constant. Requires n >= 3.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct ClusterCost {
  std::size_t size = 0;
  double cost_mean = 0.0;
  double cost_std = 0.0;
};

struct AnalysisReport {
  int k = 7;
  std::size_t records = 0;
  double silhouette_mean = 0.0;
  std::vector<ClusterCost> clusters;
  std::vector<Correlation> feature_correlations;  // one per spectrum component
  // Inverse view: records grouped by 1-D k-means on cost.
  std::vector<ClusterCost> cost_clusters;
  double intra_cluster_spectrum_corr = 0.0;
};

struct AnalyzeOptions {
  int k = 7;
  int restarts = 50;
  std::uint64_t seed = 0;
};

/// Cost is the record's transformed target. Throws InputError when there
/// are fewer than k records or spectra of unequal length.
AnalysisReport analyze(const std::vector<DatasetRecord>& records, const AnalyzeOptions& opts);

std::string analysis_to_json(const AnalysisReport& r);
/// One row per spectrum component: feature,r,p_value.
std::string correlations_to_csv(const AnalysisReport& r);
/// One row per cluster: view,cluster,size,cost_mean,cost_std.
std::string clusters_to_csv(const AnalysisReport& r);

}  // namespace bcsorder
