#pragma once

// Median solving cost per (system, method) with a fixed seed schedule.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcsorder/anf.hpp"
#include "bcsorder/annealer.hpp"
#include "bcsorder/predictor.hpp"

namespace bcsorder {

enum class BenchMethod {
  identity,          // bcs-identity: the system's own variable order
  random,            // bcs-random: one random ordering per repetition
  random_best_of_r,  // bcs-random-best-of-r: cheapest of r random orderings, by true solve
  sa,                // bcs-sa: annealed ordering under the model
};

std::string to_string(BenchMethod m);
/// Throws InputError for an unknown name.
BenchMethod bench_method_from_string(const std::string& s);

struct BenchSystem {
  std::string name;
  BoolSystem system;
};

struct BenchConfig {
  std::vector<BenchMethod> methods{BenchMethod::identity, BenchMethod::random_best_of_r, BenchMethod::sa};
  unsigned repetitions = 5;
  unsigned r = 20;  // orderings tried by random_best_of_r
  SaConfig sa;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct BenchRow {
  std::string problem;
  std::string method;
  unsigned repetitions = 0;
  double median_nodes = 0.0;
  double median_wall_ms = 0.0;
  std::vector<double> nodes;  // per repetition
};

/// Rows in (system, method) order. The sa method needs a model whose
/// feature length matches each system; InputError otherwise.
std::vector<BenchRow> bench(const std::vector<BenchSystem>& systems, const BenchConfig& cfg,
                            const GbtModel* model = nullptr, const ResidualStats* stats = nullptr);

std::string bench_to_text(const std::vector<BenchRow>& rows);
std::string bench_to_csv(const std::vector<BenchRow>& rows, bool include_wall = true);

}  // namespace bcsorder
