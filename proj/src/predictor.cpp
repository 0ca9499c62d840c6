#include "bcsorder/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bcsorder/errors.hpp"
#include "bcsorder/random.hpp"
#include "json.hpp"

namespace bcsorder {

std::string to_string(TargetTransform t) { return t == TargetTransform::log1p_nodes ? "log1p_nodes" : "raw"; }

TargetTransform target_transform_from_string(const std::string& s) {
  if (s == "log1p_nodes") return TargetTransform::log1p_nodes;
  if (s == "raw") return TargetTransform::raw;
  throw InputError("unknown target transform '" + s + "'");
}

double apply_transform(TargetTransform t, double cost) {
  return t == TargetTransform::log1p_nodes ? std::log1p(cost) : cost;
}

double invert_transform(TargetTransform t, double target) {
  return t == TargetTransform::log1p_nodes ? std::expm1(target) : target;
}

void TrainConfig::validate() const {
  if (n_estimators < 1) throw InputError("n_estimators must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw InputError("learning_rate must be in (0, 1]");
  if (max_depth < 1) throw InputError("max_depth must be >= 1");
  if (min_samples_leaf < 1) throw InputError("min_samples_leaf must be >= 1");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw InputError("subsample must be in (0, 1]");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InputError("validation_fraction must be in (0, 1)");
  }
  if (n_iter_no_change < 1) throw InputError("n_iter_no_change must be >= 1");
}

double RegressionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes_[i].feature >= 0) {
    const TreeNode& n = nodes_[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[i].feature >= 0) {
      stack.push_back({nodes_[i].left, d + 1});
      stack.push_back({nodes_[i].right, d + 1});
    }
  }
  return deepest;
}

double GbtModel::predict(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw InputError("feature length " + std::to_string(x.size()) + " does not match model (" +
                     std::to_string(n_features) + ")");
  }
  double sum = 0.0;
  for (const RegressionTree& t : trees) sum += t.predict(x);
  return base + shrinkage * sum;
}

std::vector<double> GbtModel::predict_batch(const std::vector<std::vector<double>>& xs) const {
  for (const auto& x : xs) {
    if (x.size() != n_features) {
      throw InputError("feature length " + std::to_string(x.size()) + " does not match model (" +
                       std::to_string(n_features) + ")");
    }
  }
  std::vector<double> sums(xs.size(), 0.0);
  for (const RegressionTree& t : trees) {
    for (std::size_t r = 0; r < xs.size(); ++r) sums[r] += t.predict(xs[r]);
  }
  for (double& v : sums) v = base + shrinkage * v;
  return sums;
}

double residual_window_variance(std::span<const double> residuals, std::size_t h) {
  if (h < 2) throw InputError("residual window must be at least 2");
  if (residuals.size() < 2) throw InputError("residual window variance needs at least 2 residuals");
  const std::size_t take = std::min(h, residuals.size());
  const auto window = residuals.last(take);
  const double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(take);
  double ss = 0.0;
  for (const double r : window) ss += (r - mean) * (r - mean);
  return ss / static_cast<double>(take - 1);
}

double residual_window_variance(const ResidualStats& stats, std::size_t h) {
  return residual_window_variance(stats.residuals, h);
}

double ResidualStats::window_variance(std::size_t h) const { return residual_window_variance(residuals, h); }

namespace {

using Matrix = std::vector<std::vector<double>>;

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<double>& residual, const TrainConfig& cfg, Rng& rng)
      : x_(x), r_(residual), cfg_(cfg), rng_(rng) {
    const std::size_t d = x.front().size();
    per_split_ = cfg.feature_fraction == FeatureFraction::all
                     ? d
                     : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    per_split_ = std::clamp<std::size_t>(per_split_, 1, d);
  }

  RegressionTree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(std::move(rows), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0;
    for (const std::size_t r : rows) sum += r_[r];
    nodes_[id].value = sum / static_cast<double>(rows.size());

    if (depth >= cfg_.max_depth || rows.size() < 2 * static_cast<std::size_t>(cfg_.min_samples_leaf)) return id;
    const Split split = best_split(rows, sum);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (const std::size_t r : rows) {
      (x_[r][split.feature] <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int rt = grow(std::move(right), depth + 1);
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].left = l;
    nodes_[id].right = rt;
    return id;
  }

  std::vector<std::size_t> sample_features() {
    const std::size_t d = x_.front().size();
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < per_split_; ++i) {
      std::swap(all[i], all[i + uniform_below(rng_, d - i)]);
    }
    all.resize(per_split_);
    std::sort(all.begin(), all.end());
    return all;
  }

  // Variance reduction; ties go to the lowest feature, then lowest threshold.
  Split best_split(const std::vector<std::size_t>& rows, double total) {
    const auto n = static_cast<double>(rows.size());
    const std::size_t min_leaf = static_cast<std::size_t>(cfg_.min_samples_leaf);
    const double parent = total * total / n;
    Split best;
    std::vector<std::pair<double, double>> col(rows.size());
    for (const std::size_t f : sample_features()) {
      for (std::size_t k = 0; k < rows.size(); ++k) col[k] = {x_[rows[k]][f], r_[rows[k]]};
      std::sort(col.begin(), col.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < col.size(); ++k) {
        left_sum += col[k].second;
        if (col[k].first == col[k + 1].first) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = col.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - parent;
        if (gain > best.gain * (1.0 + 1e-12) + 1e-15) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (col[k].first + col[k + 1].first);
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const std::vector<double>& r_;
  const TrainConfig& cfg_;
  Rng& rng_;
  std::size_t per_split_ = 1;
  std::vector<TreeNode> nodes_;
};

double mse(const std::vector<double>& pred, const std::vector<double>& y, const std::vector<std::size_t>& rows) {
  double s = 0.0;
  for (const std::size_t r : rows) s += (y[r] - pred[r]) * (y[r] - pred[r]);
  return s / static_cast<double>(rows.size());
}

}  // namespace

TrainResult train(const Matrix& features, const std::vector<double>& costs, const TrainConfig& cfg) {
  cfg.validate();
  if (features.size() != costs.size()) throw InputError("feature and cost counts differ");
  if (features.size() < 20) throw InputError("training needs at least 20 rows, got " + std::to_string(features.size()));
  const std::size_t d = features.front().size();
  if (d == 0) throw InputError("feature vectors are empty");
  for (const auto& row : features) {
    if (row.size() != d) throw InputError("inconsistent feature length in training set");
  }

  std::vector<double> y(costs.size());
  std::transform(costs.begin(), costs.end(), y.begin(), [&](double c) { return apply_transform(cfg.transform, c); });

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(y.size()))));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> fit(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(fit.begin(), fit.end());

  TrainResult out;
  GbtModel& model = out.model;
  model.n_features = d;
  model.shrinkage = cfg.learning_rate;
  model.transform = cfg.transform;
  double base = 0.0;
  for (const std::size_t r : fit) base += y[r];
  model.base = base / static_cast<double>(fit.size());

  std::vector<double> pred(y.size(), model.base);
  std::vector<double> residual(y.size(), 0.0);
  TreeBuilder builder(features, residual, cfg, rng);
  const auto n_sub = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.subsample * static_cast<double>(fit.size()))));

  double best_val = mse(pred, y, val);
  std::size_t best_stage = 0;
  for (int stage = 0; stage < cfg.n_estimators; ++stage) {
    for (const std::size_t r : fit) residual[r] = y[r] - pred[r];
    std::vector<std::size_t> rows = fit;
    if (n_sub < rows.size()) {
      for (std::size_t i = 0; i < n_sub; ++i) std::swap(rows[i], rows[i + uniform_below(rng, rows.size() - i)]);
      rows.resize(n_sub);
      std::sort(rows.begin(), rows.end());
    }
    RegressionTree tree = builder.build(std::move(rows));
    for (std::size_t r = 0; r < y.size(); ++r) pred[r] += cfg.learning_rate * tree.predict(features[r]);
    model.trees.push_back(std::move(tree));

    out.train_loss.push_back(mse(pred, y, fit));
    const double v = mse(pred, y, val);
    out.validation_loss.push_back(v);
    if (v < best_val) {
      best_val = v;
      best_stage = model.trees.size();
    } else if (model.trees.size() - best_stage >= static_cast<std::size_t>(cfg.n_iter_no_change)) {
      break;
    }
  }
  model.trees.resize(best_stage);
  out.best_stage = best_stage;

  for (const std::size_t r : val) out.stats.residuals.push_back(y[r] - model.predict(features[r]));
  double ss = 0.0;
  for (const double e : out.stats.residuals) ss += e * e;
  out.stats.rmse = std::sqrt(ss / static_cast<double>(out.stats.residuals.size()));
  out.validation_rows = val;
  double val_mean = 0.0;
  for (const std::size_t r : val) val_mean += y[r];
  val_mean /= static_cast<double>(val.size());
  double ss_tot = 0.0;
  for (const std::size_t r : val) ss_tot += (y[r] - val_mean) * (y[r] - val_mean);
  out.validation_r2 = ss_tot > 0.0 ? 1.0 - ss / ss_tot : 0.0;
  return out;
}

double rmse(const GbtModel& m, const Matrix& features, const std::vector<double>& targets) {
  if (features.empty() || features.size() != targets.size()) throw InputError("rmse needs a non-empty holdout");
  double ss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double e = targets[i] - m.predict(features[i]);
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(features.size()));
}

double r_squared(const GbtModel& m, const Matrix& features, const std::vector<double>& targets) {
  if (features.empty() || features.size() != targets.size()) throw InputError("r_squared needs a non-empty holdout");
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double e = targets[i] - m.predict(features[i]);
    ss_res += e * e;
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  return ss_tot == 0.0 ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
}

// ---- persistence ---------------------------------------------------------

std::string model_to_json(const GbtModel& m, const ResidualStats* stats) {
  nlohmann::ordered_json doc;
  doc["version"] = kModelFormatVersion;
  doc["target_transform"] = to_string(m.transform);
  doc["n_features"] = m.n_features;
  doc["base"] = m.base;
  doc["shrinkage"] = m.shrinkage;
  auto& trees = doc["trees"] = nlohmann::ordered_json::array();
  for (const RegressionTree& t : m.trees) {
    auto nodes = nlohmann::ordered_json::array();
    for (const TreeNode& n : t.nodes()) {
      if (n.feature < 0) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  if (stats != nullptr) {
    doc["validation"] = {{"rmse", stats->rmse}, {"residuals", stats->residuals}};
  }
  return doc.dump();
}

namespace {

nlohmann::json parse_model_doc(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed model file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version")) throw LoadError("model file has no version field");
  if (doc["version"] != kModelFormatVersion) {
    throw LoadError("model format version " + doc["version"].dump() + " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

GbtModel model_from_json(const std::string& text) {
  const nlohmann::json doc = parse_model_doc(text);
  try {
    GbtModel m;
    m.transform = target_transform_from_string(doc.at("target_transform").get<std::string>());
    m.n_features = doc.at("n_features").get<std::size_t>();
    m.base = doc.at("base").get<double>();
    m.shrinkage = doc.at("shrinkage").get<double>();
    for (const auto& t : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& n : t.at("nodes")) {
        TreeNode node;
        if (n.contains("feature")) {
          node.feature = n.at("feature").get<int>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<int>();
          node.right = n.at("right").get<int>();
        } else {
          node.value = n.at("value").get<double>();
        }
        nodes.push_back(node);
      }
      const auto count = static_cast<int>(nodes.size());
      if (count == 0) throw LoadError("model contains an empty tree");
      for (const TreeNode& node : nodes) {
        if (node.feature >= 0 &&
            (node.feature >= static_cast<int>(m.n_features) || node.left <= 0 || node.left >= count ||
             node.right <= 0 || node.right >= count)) {
          throw LoadError("model tree references an invalid node or feature");
        }
      }
      m.trees.emplace_back(std::move(nodes));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed model file: ") + e.what());
  } catch (const InputError& e) {
    throw LoadError(e.what());
  }
}

ResidualStats residual_stats_from_json(const std::string& text) {
  const nlohmann::json doc = parse_model_doc(text);
  ResidualStats stats;
  if (!doc.contains("validation")) return stats;
  try {
    stats.rmse = doc["validation"].at("rmse").get<double>();
    stats.residuals = doc["validation"].at("residuals").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed validation block: ") + e.what());
  }
  return stats;
}

void save_model(const GbtModel& m, const std::string& path, const ResidualStats* stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write model file " + path);
  out << model_to_json(m, stats) << '\n';
}

GbtModel load_model(const std::string& path) { return model_from_json(read_file(path)); }

ResidualStats load_residual_stats(const std::string& path) { return residual_stats_from_json(read_file(path)); }

}  // namespace bcsorder
