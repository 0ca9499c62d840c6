#include <cmath>
#include <filesystem>
#include <fstream>

#include "bcsorder/analysis.hpp"
#include "bcsorder/bench.hpp"
#include "bcsorder/dataset.hpp"
#include "bcsorder/errors.hpp"
#include "bcsorder/instances.hpp"
#include "bcsorder/solver.hpp"
#include "bcsorder/theorem.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bcsorder;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(p);
  return p;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
  return n;
}

TrainResult small_model(unsigned n, std::uint64_t seed) {
  CollectConfig cc;
  cc.instance = desk_instance(n);
  cc.systems = 20;
  cc.orderings_per_system = 10;
  cc.seed = seed;
  const FeatureTable t = to_feature_table(collect_records(cc));
  TrainConfig tc;
  tc.n_estimators = 80;
  tc.learning_rate = 0.1;
  tc.seed = seed;
  return train(t.features, t.costs, tc);
}

}  // namespace

TEST_SUITE("generator") {
  TEST_CASE("planted systems vanish at the planted point") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const InstanceSpec spec{12, 12, 2, 0.3, true, seed};
      const BoolSystem s = gen_random_system(spec);
      const Assignment star = planted_solution(spec);
      for (const Poly& p : s.polys) CHECK_FALSE(p.eval(star));
      CHECK_FALSE(brute_force_solve(s).empty());
    }
  }

  TEST_CASE("monomial count matches the density") {
    double total = 0.0;
    constexpr int kSystems = 400;
    for (int i = 0; i < kSystems; ++i) {
      const BoolSystem s = gen_random_system({6, 10, 2, 0.5, false, static_cast<std::uint64_t>(i)});
      for (const Poly& p : s.polys) total += static_cast<double>(p.size());
    }
    CHECK(std::abs(total / (kSystems * 10) - 11.0) <= 0.5);
  }

  TEST_CASE("full density of degree one") {
    const BoolSystem s = gen_random_system({5, 3, 1, 1.0, false, 1});
    for (const Poly& p : s.polys) {
      CHECK(tdeg(p) == 1U);
      CHECK(p.size() == 6);
    }
  }

  TEST_CASE("spec validation") {
    CHECK_THROWS_AS(gen_random_system({0, 1, 1, 0.5, true, 0}), InputError);
    CHECK_THROWS_AS(gen_random_system({4, 1, 5, 0.5, true, 0}), InputError);
    CHECK_THROWS_AS(gen_random_system({4, 1, 2, 0.0, true, 0}), InputError);
    CHECK(gen_random_system({8, 4, 2, 0.4, true, 3}) == gen_random_system({8, 4, 2, 0.4, true, 3}));
  }

  TEST_CASE("brute force") {
    CHECK(brute_force_solve(parse_system("# vars: 2\nx1*x2 + 1\n")) == std::vector<Assignment>{3});
    CHECK(brute_force_solve(parse_system("# vars: 2\nx1 + x2\n")) == std::vector<Assignment>{0, 3});
    CHECK_THROWS_AS(brute_force_solve(BoolSystem{25, {}}), InputError);
  }
}

TEST_SUITE("dataset") {
  TEST_CASE("record round-trip and key") {
    DatasetRecord r;
    r.system_id = "n4-m2-7";
    r.n = 4;
    r.m = 2;
    r.gen_seed = 7;
    r.ordering = {2, 1, 4, 3};
    r.spectrum = {0.25, 0.25, 0.25, 0.25};
    r.node_count = 9;
    r.target = std::log1p(9.0);
    const DatasetRecord back = record_from_json(record_to_json(r));
    CHECK(back.key() == "n4-m2-7|2,1,4,3");
    CHECK(record_to_json(back) == record_to_json(r));
    CHECK_THROWS(record_from_json("{not json"));
  }

  TEST_CASE("collect writes every task once and resumes") {
    const auto path = scratch("bcsorder_collect_test.jsonl");
    CollectConfig cfg;
    cfg.instance = desk_instance(8);
    cfg.systems = 10;
    cfg.orderings_per_system = 5;
    cfg.seed = 4;
    cfg.jobs = 3;
    CHECK(collect_dataset(cfg, path.string()) == 50);
    CHECK(line_count(path) == 50);
    CHECK(collect_dataset(cfg, path.string()) == 0);
    CHECK(line_count(path) == 50);

    const auto records = read_dataset(path.string());
    REQUIRE(records.size() == 50);
    for (const DatasetRecord& r : records) CHECK(audit_record(r));
    DatasetRecord tampered = records.front();
    tampered.node_count += 1;
    CHECK_FALSE(audit_record(tampered));
    tampered = records.front();
    std::swap(tampered.spectrum.front(), tampered.spectrum.back());
    if (tampered.spectrum.front() != tampered.spectrum.back()) CHECK_FALSE(audit_record(tampered));

    cfg.jobs = 1;
    const auto serial = collect_records(cfg);
    REQUIRE(serial.size() == records.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(record_to_json(serial[i], false) == record_to_json(records[i], false));
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("malformed dataset rows report their line") {
    const auto path = scratch("bcsorder_bad_dataset.jsonl");
    {
      std::ofstream out(path);
      out << "{}\n";
    }
    try {
      read_dataset(path.string());
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find(":1") != std::string::npos);
    }
    std::filesystem::remove(path);
  }
}

TEST_SUITE("analysis") {
  TEST_CASE("two separated blobs") {
    Rng rng(1);
    Points pts;
    for (int i = 0; i < 100; ++i) {
      const double off = i < 50 ? 0.0 : 5.0;
      pts.push_back({off + 0.1 * standard_normal(rng), off + 0.1 * standard_normal(rng)});
    }
    const KMeansResult km = kmeans(pts, 2, 10, 3);
    for (int i = 1; i < 50; ++i) CHECK(km.labels[i] == km.labels[0]);
    for (int i = 51; i < 100; ++i) CHECK(km.labels[i] == km.labels[50]);
    CHECK(km.labels[0] != km.labels[50]);
    CHECK(silhouette_mean(pts, km.labels, 2) >= 0.8);
    CHECK_THROWS_AS(kmeans(Points{{0.0}}, 2, 1, 0), InputError);
  }

  TEST_CASE("correlations") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> y{2, 1, 4, 3, 6, 5};
    CHECK(pearson(x, x).r == doctest::Approx(1.0));
    CHECK(pearson(x, x).p_value == doctest::Approx(0.0));
    const std::vector<double> flat(6, 2.0);
    CHECK(pearson(x, flat).r == 0.0);
    CHECK(pearson(x, flat).p_value == 1.0);
    const Correlation c = pearson(x, y);
    CHECK(c.r == doctest::Approx(0.8285714).epsilon(1e-6));
    CHECK(c.p_value > 0.0);
    CHECK(c.p_value < 0.1);
    const std::vector<double> cubes{1, 8, 27, 64, 125, 216};
    CHECK(spearman(x, cubes) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InputError);
  }

  TEST_CASE("analyze a small dataset") {
    CollectConfig cfg;
    cfg.instance = desk_instance(8);
    cfg.systems = 6;
    cfg.orderings_per_system = 10;
    const auto records = collect_records(cfg);
    const AnalysisReport r = analyze(records, {.k = 3, .restarts = 5, .seed = 2});
    CHECK(r.records == 60);
    CHECK(r.clusters.size() == 3);
    CHECK(r.feature_correlations.size() == 8);
    std::size_t total = 0;
    for (const ClusterCost& c : r.clusters) total += c.size;
    CHECK(total == 60);
    CHECK(r.silhouette_mean >= -1.0);
    CHECK(r.silhouette_mean <= 1.0);
    CHECK(nlohmann::json::parse(analysis_to_json(r)).at("k") == 3);
    CHECK(analysis_to_json(r) == analysis_to_json(analyze(records, {.k = 3, .restarts = 5, .seed = 2})));
    const std::vector<DatasetRecord> few(records.begin(), records.begin() + 2);
    CHECK_THROWS_AS(analyze(few, {.k = 3}), InputError);
  }
}

TEST_SUITE("theorem") {
  TEST_CASE("correlation bound for a noisy predictor") {
    const auto rows = verify_lemma1(1.0, {0.0, 0.6, 0.9}, 100000, 5);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rho_predicted == 1.0);
    CHECK(rows[0].rho_empirical == doctest::Approx(1.0));
    CHECK(rows[1].rho_predicted == doctest::Approx(0.8));
    for (const Lemma1Row& r : rows) CHECK(std::abs(r.rho_empirical - r.rho_predicted) <= 0.02);
    CHECK_THROWS_AS(verify_lemma1(1.0, {1.0}, 100000, 0), DomainError);
    CHECK_THROWS_AS(verify_lemma1(1.0, {-0.1}, 100000, 0), DomainError);
    CHECK_THROWS_AS(verify_lemma1(1.0, {0.5}, 100, 0), InputError);
    CHECK(lemma1_to_csv(rows) == lemma1_to_csv(verify_lemma1(1.0, {0.0, 0.6, 0.9}, 100000, 5)));
  }

  TEST_CASE("improvement report structure") {
    const TrainResult model = small_model(9, 11);
    std::vector<BoolSystem> corpus;
    for (unsigned i = 0; i < 4; ++i) corpus.push_back(gen_random_system(desk_instance(9, 900 + i)));
    ImprovementConfig cfg;
    cfg.noise_levels = {0.0, 1.0};
    cfg.baseline_orderings = 8;
    cfg.sa.iterations = 40;
    cfg.sa.alpha = 0.9;
    cfg.sa.beta = 0.1;
    cfg.seed = 3;
    cfg.jobs = 2;
    const TheoremReport r = verify_improvement(corpus, model.model, model.stats, cfg);
    CHECK(r.systems == 4);
    REQUIRE(r.levels.size() == 3);
    CHECK(r.levels.back().label == "pure-noise");
    CHECK(r.sigma_tau > 0.0);
    for (const LevelResult& l : r.levels) {
      CHECK(l.delta_nodes.size() == 4);
      CHECK(l.ci_low <= l.mean_delta_nodes);
      CHECK(l.mean_delta_nodes <= l.ci_high);
      CHECK(l.rho >= 0.0);
      CHECK(l.rho <= 1.0);
    }
    CHECK(r.levels[1].e_hat >= r.levels[0].e_hat);
    cfg.jobs = 1;
    CHECK(theorem_to_csv(r) == theorem_to_csv(verify_improvement(corpus, model.model, model.stats, cfg)));
    CHECK_THROWS_AS(verify_improvement({}, model.model, model.stats, cfg), InputError);
  }
}

TEST_SUITE("bench") {
  TEST_CASE("method names") {
    for (const auto m : {BenchMethod::identity, BenchMethod::random, BenchMethod::random_best_of_r, BenchMethod::sa}) {
      CHECK(bench_method_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(bench_method_from_string("bcs-magic"), InputError);
  }

  TEST_CASE("single system rows and reproducible csv") {
    const std::vector<BenchSystem> systems{{"s0", gen_random_system(desk_instance(10, 5))}};
    BenchConfig cfg;
    cfg.methods = {BenchMethod::identity, BenchMethod::random_best_of_r};
    cfg.repetitions = 3;
    cfg.r = 4;
    const auto rows = bench(systems, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].problem == "s0");
    CHECK(rows[0].method == "bcs-identity");
    CHECK(rows[1].nodes.size() == 3);
    // identity is deterministic across repetitions.
    CHECK(rows[0].nodes[0] == rows[0].nodes[2]);
    CHECK(rows[0].median_nodes == static_cast<double>(solve_all(systems[0].system).cost.node_count));
    CHECK(bench_to_csv(rows, false) == bench_to_csv(bench(systems, cfg), false));
    CHECK(bench_to_text(rows).find("bcs-random-best-of-r") != std::string::npos);

    cfg.methods = {BenchMethod::sa};
    CHECK_THROWS_AS(bench(systems, cfg), InputError);
  }

  TEST_CASE("annealed orderings with a model") {
    const TrainResult model = small_model(10, 21);
    const std::vector<BenchSystem> systems{{"s1", gen_random_system(desk_instance(10, 77))}};
    BenchConfig cfg;
    cfg.methods = {BenchMethod::sa};
    cfg.repetitions = 2;
    cfg.sa.iterations = 30;
    const auto rows = bench(systems, cfg, &model.model, &model.stats);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].method == "bcs-sa");
    CHECK(rows[0].median_nodes >= 1.0);
  }
}
