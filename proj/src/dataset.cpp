#include "bcsorder/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "bcsorder/errors.hpp"
#include "bcsorder/parallel.hpp"
#include "bcsorder/random.hpp"
#include "bcsorder/solver.hpp"
#include "json.hpp"

namespace bcsorder {

std::string DatasetRecord::key() const {
  std::string k = system_id + "|";
  for (std::size_t i = 0; i < ordering.size(); ++i) k += (i ? "," : "") + std::to_string(ordering[i]);
  return k;
}

std::string record_to_json(const DatasetRecord& r, bool include_wall) {
  nlohmann::ordered_json j;
  j["system_id"] = r.system_id;
  j["n"] = r.n;
  j["m"] = r.m;
  j["degree"] = r.degree;
  j["density"] = r.density;
  j["planted"] = r.planted;
  j["gen_seed"] = r.gen_seed;
  j["ordering_seed"] = r.ordering_seed;
  j["ordering"] = r.ordering;
  j["spectrum"] = r.spectrum;
  j["node_count"] = r.node_count;
  j["leaf_count"] = r.leaf_count;
  j["op_count"] = r.op_count;
  if (include_wall) j["wall_ms"] = r.wall_ms;
  j["transform"] = to_string(r.transform);
  j["target"] = r.target;
  return j.dump();
}

DatasetRecord record_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  DatasetRecord r;
  r.system_id = j.at("system_id").get<std::string>();
  r.n = j.at("n").get<unsigned>();
  r.m = j.at("m").get<unsigned>();
  r.degree = j.at("degree").get<unsigned>();
  r.density = j.at("density").get<double>();
  r.planted = j.at("planted").get<bool>();
  r.gen_seed = j.at("gen_seed").get<std::uint64_t>();
  r.ordering_seed = j.at("ordering_seed").get<std::uint64_t>();
  r.ordering = j.at("ordering").get<std::vector<unsigned>>();
  r.spectrum = j.at("spectrum").get<std::vector<double>>();
  r.node_count = j.at("node_count").get<std::uint64_t>();
  r.leaf_count = j.at("leaf_count").get<std::uint64_t>();
  r.op_count = j.at("op_count").get<std::uint64_t>();
  r.wall_ms = j.value("wall_ms", 0.0);
  r.transform = target_transform_from_string(j.at("transform").get<std::string>());
  r.target = j.at("target").get<double>();
  return r;
}

std::vector<DatasetRecord> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path);
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const std::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

double density_for_terms(unsigned n, unsigned degree, double terms) {
  double pool = 0.0;
  double binom = 1.0;
  for (unsigned k = 1; k <= degree && k <= n; ++k) {
    binom = binom * static_cast<double>(n - k + 1) / static_cast<double>(k);
    pool += binom;
  }
  return std::min(1.0, terms / pool);
}

InstanceSpec desk_instance(unsigned n, std::uint64_t seed) {
  return {n, std::max(1U, n / 2), 2, density_for_terms(n, 2, 5.0), true, seed};
}

std::uint64_t system_seed(std::uint64_t seed, unsigned index) { return mix_seed(seed, index); }

std::uint64_t ordering_seed(std::uint64_t gen_seed, unsigned index) { return mix_seed(gen_seed, 1000003ULL + index); }

namespace {

std::string make_system_id(const InstanceSpec& spec) {
  return "n" + std::to_string(spec.n) + "-m" + std::to_string(spec.m) + "-" + std::to_string(spec.seed);
}

DatasetRecord solve_task(const BoolSystem& sys, const InstanceSpec& spec, std::uint64_t oseed,
                         TargetTransform transform) {
  const Ordering o = random_ordering(spec.n, oseed);
  SolveOptions opts;
  opts.keep_sets = false;
  const SolveResult res = solve_with_ordering(sys, o, opts);
  DatasetRecord r;
  r.system_id = make_system_id(spec);
  r.n = spec.n;
  r.m = spec.m;
  r.degree = spec.degree;
  r.density = spec.density;
  r.planted = spec.planted;
  r.gen_seed = spec.seed;
  r.ordering_seed = oseed;
  r.ordering.assign(o.perm().begin(), o.perm().end());
  r.spectrum = permute_spectrum(spectrum(sys), o);
  r.node_count = res.cost.node_count;
  r.leaf_count = res.cost.leaf_count;
  r.op_count = res.cost.op_count;
  r.wall_ms = res.cost.wall_ms;
  r.transform = transform;
  r.target = apply_transform(transform, static_cast<double>(res.cost.node_count));
  return r;
}

struct Task {
  unsigned system = 0;
  unsigned ordering = 0;
};

std::vector<DatasetRecord> run_tasks(const CollectConfig& cfg, const std::set<std::string>& skip) {
  std::vector<InstanceSpec> specs;
  std::vector<BoolSystem> systems;
  for (unsigned s = 0; s < cfg.systems; ++s) {
    InstanceSpec spec = cfg.instance;
    spec.seed = system_seed(cfg.seed, s);
    systems.push_back(gen_random_system(spec));
    specs.push_back(spec);
  }
  std::vector<Task> tasks;
  for (unsigned s = 0; s < cfg.systems; ++s) {
    for (unsigned o = 0; o < cfg.orderings_per_system; ++o) {
      const Ordering ord = random_ordering(specs[s].n, ordering_seed(specs[s].seed, o));
      DatasetRecord probe;
      probe.system_id = make_system_id(specs[s]);
      probe.ordering.assign(ord.perm().begin(), ord.perm().end());
      if (!skip.contains(probe.key())) tasks.push_back({s, o});
    }
  }
  std::vector<DatasetRecord> out(tasks.size());
  parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
    const Task t = tasks[i];
    out[i] = solve_task(systems[t.system], specs[t.system], ordering_seed(specs[t.system].seed, t.ordering),
                        cfg.transform);
  });
  return out;
}

}  // namespace

std::vector<DatasetRecord> collect_records(const CollectConfig& cfg) {
  cfg.instance.validate();
  return run_tasks(cfg, {});
}

std::size_t collect_dataset(const CollectConfig& cfg, const std::string& out_path) {
  cfg.instance.validate();
  std::set<std::string> present;
  if (std::ifstream probe(out_path); probe) {
    for (const DatasetRecord& r : read_dataset(out_path)) present.insert(r.key());
  }
  const std::vector<DatasetRecord> fresh = run_tasks(cfg, present);
  std::ofstream out(out_path, std::ios::app);
  if (!out) throw InputError("cannot write dataset " + out_path);
  for (const DatasetRecord& r : fresh) out << record_to_json(r) << '\n';
  if (!out) throw InputError("write failed for dataset " + out_path);
  return fresh.size();
}

bool audit_record(const DatasetRecord& r) {
  const BoolSystem sys = gen_random_system(r.instance());
  const Ordering o(r.ordering);
  const Spectrum expect = spectrum(apply_ordering(sys, o));
  if (expect.size() != r.spectrum.size()) return false;
  for (std::size_t i = 0; i < expect.size(); ++i) {
    if (std::abs(expect[i] - r.spectrum[i]) > 1e-12) return false;
  }
  return std::abs(apply_transform(r.transform, static_cast<double>(r.node_count)) - r.target) <= 1e-12;
}

FeatureTable to_feature_table(const std::vector<DatasetRecord>& records) {
  FeatureTable t;
  for (const DatasetRecord& r : records) {
    t.features.push_back(r.spectrum);
    t.costs.push_back(static_cast<double>(r.node_count));
  }
  return t;
}

}  // namespace bcsorder
