#pragma once

// Gradient-boosted regression trees (squared loss) mapping a frequency
// spectrum to a solving-cost estimate.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bcsorder {

enum class TargetTransform { log1p_nodes, raw };

std::string to_string(TargetTransform t);
TargetTransform target_transform_from_string(const std::string& s);

/// Maps a raw cost (node count) into the model's target domain.
double apply_transform(TargetTransform t, double cost);
double invert_transform(TargetTransform t, double target);

enum class FeatureFraction { sqrt, all };

struct TrainConfig {
  int n_estimators = 1000;
  double learning_rate = 0.01;
  int max_depth = 20;
  int min_samples_leaf = 12;
  double subsample = 0.8;
  /// sqrt: ceil(sqrt(d)) candidate features per split.
  FeatureFraction feature_fraction = FeatureFraction::sqrt;
  double validation_fraction = 0.1;
  int n_iter_no_change = 50;
  TargetTransform transform = TargetTransform::log1p_nodes;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const;
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct GbtModel {
  std::size_t n_features = 0;
  double base = 0.0;
  double shrinkage = 0.1;
  TargetTransform transform = TargetTransform::raw;
  std::vector<RegressionTree> trees;

  /// base + shrinkage * sum of tree outputs, in the target domain.
  /// Throws InputError on a feature-length mismatch.
  double predict(std::span<const double> x) const;
  /// Same values as predict() row by row; walks the ensemble tree-major.
  std::vector<double> predict_batch(const std::vector<std::vector<double>>& xs) const;
};

struct ResidualStats {
  double rmse = 0.0;
  /// truth - prediction on the validation split, in row order.
  std::vector<double> residuals;

  /// Sample variance (divisor h-1) of the last h residuals; all of them
  /// when fewer than h exist.
  double window_variance(std::size_t h) const;
};

struct TrainResult {
  GbtModel model;
  ResidualStats stats;
  std::vector<double> train_loss;       // per stage, MSE on the training rows
  std::vector<double> validation_loss;  // per stage, MSE on the validation rows
  std::size_t best_stage = 0;           // number of trees kept
  std::vector<std::size_t> validation_rows;  // input row indices, ascending
  double validation_r2 = 0.0;
};

/// `costs` are raw costs; cfg.transform maps them to targets. Requires at
/// least 20 rows with equal feature lengths.
TrainResult train(const std::vector<std::vector<double>>& features, const std::vector<double>& costs,
                  const TrainConfig& cfg);

/// Root-mean-square of (target - prediction) over a holdout set given in
/// the target domain.
double rmse(const GbtModel& m, const std::vector<std::vector<double>>& features,
            const std::vector<double>& targets);

double r_squared(const GbtModel& m, const std::vector<std::vector<double>>& features,
                 const std::vector<double>& targets);

/// Sample variance (divisor h-1) of the last h entries of `residuals`.
double residual_window_variance(std::span<const double> residuals, std::size_t h);
double residual_window_variance(const ResidualStats& stats, std::size_t h);

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON {version, target_transform, n_features, base, shrinkage,
/// trees, validation?}. The optional validation block carries the
/// residual stream the annealer's adaptive cooling draws on.
std::string model_to_json(const GbtModel& m, const ResidualStats* stats = nullptr);
/// Throws LoadError on malformed input or a version mismatch.
GbtModel model_from_json(const std::string& text);
/// Empty stats when the document has no validation block.
ResidualStats residual_stats_from_json(const std::string& text);

void save_model(const GbtModel& m, const std::string& path, const ResidualStats* stats = nullptr);
GbtModel load_model(const std::string& path);
ResidualStats load_residual_stats(const std::string& path);

}  // namespace bcsorder
