#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcsorder/features.hpp"
#include "bcsorder/instances.hpp"
#include "bcsorder/predictor.hpp"

namespace bcsorder {

/// One (system, ordering) solve, persisted as a JSON-Lines row. The
/// instance fields (n, m, degree, density, planted, gen_seed) regenerate
/// the system, so spectrum and target can be audited.
struct DatasetRecord {
  std::string system_id;
  unsigned n = 0;
  unsigned m = 0;
  unsigned degree = 2;
  double density = 0.5;
  bool planted = true;
  std::uint64_t gen_seed = 0;
  std::uint64_t ordering_seed = 0;
  std::vector<unsigned> ordering;
  Spectrum spectrum;
  std::uint64_t node_count = 0;
  std::uint64_t leaf_count = 0;
  std::uint64_t op_count = 0;
  double wall_ms = 0.0;
  TargetTransform transform = TargetTransform::log1p_nodes;
  double target = 0.0;

  InstanceSpec instance() const { return {n, m, degree, density, planted, gen_seed}; }
  std::string key() const;
};

std::string record_to_json(const DatasetRecord& r, bool include_wall = true);
DatasetRecord record_from_json(const std::string& line);

/// Throws InputError with file:line context on malformed rows.
std::vector<DatasetRecord> read_dataset(const std::string& path);

/// Density giving about `terms` non-constant monomials per polynomial at
/// the given n and degree.
double density_for_terms(unsigned n, unsigned degree, double terms);

/// Sparse underdetermined family used for desk-scale experiments: m = n/2
/// polynomials with about 5 quadratic-or-linear terms each, planted.
InstanceSpec desk_instance(unsigned n, std::uint64_t seed = 0);

struct CollectConfig {
  InstanceSpec instance;  // instance.seed is ignored; see system_seed()
  unsigned systems = 10;
  unsigned orderings_per_system = 5;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  TargetTransform transform = TargetTransform::log1p_nodes;
};

/// Generation seed of the i-th system of a collection run.
std::uint64_t system_seed(std::uint64_t seed, unsigned index);
/// Seed of the o-th random ordering for a system.
std::uint64_t ordering_seed(std::uint64_t gen_seed, unsigned index);

/// Solves every (system, ordering) task, producing records in task order.
std::vector<DatasetRecord> collect_records(const CollectConfig& cfg);

/// Appends records for tasks whose key is not yet in `out_path`; returns
/// the number written. Rows are written in task order by a single writer.
std::size_t collect_dataset(const CollectConfig& cfg, const std::string& out_path);

/// Re-derives spectrum and target for one record; returns false on mismatch.
bool audit_record(const DatasetRecord& r);

struct FeatureTable {
  std::vector<std::vector<double>> features;
  std::vector<double> costs;  // raw node counts
};

FeatureTable to_feature_table(const std::vector<DatasetRecord>& records);

}  // namespace bcsorder
