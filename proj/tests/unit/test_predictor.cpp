#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "bcsorder/errors.hpp"
#include "bcsorder/predictor.hpp"
#include "bcsorder/random.hpp"
#include "doctest.h"

using namespace bcsorder;

namespace {

struct Synthetic {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
};

// y = 10*x[1] - 5*x[2] + N(0, 0.1^2) over five uniform features.
Synthetic synthetic(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  Synthetic s;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> row(5);
    for (double& v : row) v = uniform01(rng);
    s.y.push_back(10.0 * row[1] - 5.0 * row[2] + 0.1 * standard_normal(rng));
    s.x.push_back(std::move(row));
  }
  return s;
}

TrainConfig raw_config(int trees) {
  TrainConfig cfg;
  cfg.n_estimators = trees;
  cfg.transform = TargetTransform::raw;
  return cfg;
}

}  // namespace

TEST_SUITE("predictor") {
  TEST_CASE("transforms") {
    CHECK(apply_transform(TargetTransform::log1p_nodes, 0.0) == 0.0);
    CHECK(invert_transform(TargetTransform::log1p_nodes, apply_transform(TargetTransform::log1p_nodes, 99.0)) ==
          doctest::Approx(99.0));
    CHECK(target_transform_from_string(to_string(TargetTransform::raw)) == TargetTransform::raw);
    CHECK_THROWS_AS(target_transform_from_string("log"), InputError);
  }

  TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = TrainConfig{};
    cfg.subsample = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    const Synthetic s = synthetic(10, 1);
    CHECK_THROWS_AS(train(s.x, s.y, TrainConfig{}), InputError);
  }

  TEST_CASE("constant target predicts the constant") {
    const Synthetic s = synthetic(200, 2);
    const std::vector<double> y(200, 3.5);
    const TrainResult r = train(s.x, y, raw_config(50));
    for (const auto& row : s.x) CHECK(r.model.predict(row) == doctest::Approx(3.5));
  }

  TEST_CASE("training loss is non-increasing without subsampling") {
    const Synthetic s = synthetic(500, 3);
    TrainConfig cfg = raw_config(100);
    cfg.subsample = 1.0;
    cfg.n_iter_no_change = 1000;
    const TrainResult r = train(s.x, s.y, cfg);
    REQUIRE(r.train_loss.size() >= 2);
    for (std::size_t k = 1; k < r.train_loss.size(); ++k) CHECK(r.train_loss[k] <= r.train_loss[k - 1] + 1e-12);
  }

  TEST_CASE("fits a known linear signal") {
    for (const std::uint64_t seed : {0U, 1U, 2U}) {
      const Synthetic all = synthetic(2000, seed);
      const std::vector<std::vector<double>> xt(all.x.begin(), all.x.begin() + 1800);
      const std::vector<double> yt(all.y.begin(), all.y.begin() + 1800);
      const std::vector<std::vector<double>> xh(all.x.begin() + 1800, all.x.end());
      const std::vector<double> yh(all.y.begin() + 1800, all.y.end());
      const TrainResult r = train(xt, yt, raw_config(300));
      CHECK(r_squared(r.model, xh, yh) >= 0.8);
      CHECK(rmse(r.model, xh, yh) <= 0.5);
      CHECK(r.validation_r2 > 0.8);
      CHECK(r.model.trees.size() == r.best_stage);
      CHECK(r.validation_rows.size() == 180);
      CHECK(r.stats.residuals.size() == 180);
    }
  }

  TEST_CASE("zero-tree model predicts its base") {
    GbtModel m;
    m.n_features = 2;
    m.base = 1.25;
    const std::vector<double> x{0.1, 0.2};
    CHECK(m.predict(x) == 1.25);
    const std::vector<double> bad{0.1};
    CHECK_THROWS_AS(m.predict(bad), InputError);
  }

  TEST_CASE("rmse of the mean equals the population standard deviation") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0, 10.0};
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 5.0;
    double ss = 0.0;
    for (const double v : y) ss += (v - mean) * (v - mean);
    GbtModel m;
    m.n_features = 1;
    m.base = mean;
    const std::vector<std::vector<double>> x(5, std::vector<double>{0.0});
    CHECK(rmse(m, x, y) == doctest::Approx(std::sqrt(ss / 5.0)));
    CHECK(r_squared(m, x, y) == doctest::Approx(0.0));
  }

  TEST_CASE("residual window variance") {
    const std::vector<double> r{5.0, 5.0, 1.0, -1.0};
    CHECK(residual_window_variance(r, 2) == doctest::Approx(2.0));
    CHECK(residual_window_variance(r, 100) == doctest::Approx(9.0));
    CHECK_THROWS_AS(residual_window_variance(r, 1), InputError);
    CHECK_THROWS_AS(residual_window_variance(std::vector<double>{1.0}, 5), InputError);
  }

  TEST_CASE("batch prediction matches single rows") {
    const Synthetic s = synthetic(400, 4);
    const TrainResult r = train(s.x, s.y, raw_config(60));
    const std::vector<double> batch = r.model.predict_batch(s.x);
    REQUIRE(batch.size() == s.x.size());
    for (std::size_t i = 0; i < s.x.size(); ++i) CHECK(batch[i] == r.model.predict(s.x[i]));
  }

  TEST_CASE("training is deterministic") {
    const Synthetic s = synthetic(400, 5);
    TrainConfig cfg = raw_config(40);
    cfg.seed = 17;
    const TrainResult a = train(s.x, s.y, cfg);
    const TrainResult b = train(s.x, s.y, cfg);
    CHECK(model_to_json(a.model, &a.stats) == model_to_json(b.model, &b.stats));
    cfg.seed = 18;
    const TrainResult c = train(s.x, s.y, cfg);
    CHECK(model_to_json(a.model) != model_to_json(c.model));
  }

  TEST_CASE("save and load round-trip") {
    const Synthetic s = synthetic(300, 6);
    const TrainResult r = train(s.x, s.y, raw_config(30));
    const auto path = (std::filesystem::temp_directory_path() / "bcsorder_model_roundtrip.json").string();
    save_model(r.model, path, &r.stats);
    const GbtModel back = load_model(path);
    CHECK(back.trees.size() == r.model.trees.size());
    CHECK(back.transform == TargetTransform::raw);
    for (const auto& row : s.x) CHECK(back.predict(row) == r.model.predict(row));
    CHECK(load_residual_stats(path).residuals == r.stats.residuals);
    CHECK(model_to_json(back, &r.stats) == model_to_json(r.model, &r.stats));

    std::string text;
    {
      std::ifstream in(path);
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    {
      std::ofstream out(path, std::ios::trunc);
      out << text.substr(0, text.size() / 2);
    }
    CHECK_THROWS_AS(load_model(path), LoadError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(model_from_json(R"({"version": 99})"), LoadError);
    CHECK_THROWS_AS(load_model(path), LoadError);
  }
}
