#include "bcsorder/bench.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "bcsorder/errors.hpp"
#include "bcsorder/parallel.hpp"
#include "bcsorder/random.hpp"
#include "bcsorder/solver.hpp"

namespace bcsorder {

std::string to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::identity: return "bcs-identity";
    case BenchMethod::random: return "bcs-random";
    case BenchMethod::random_best_of_r: return "bcs-random-best-of-r";
    case BenchMethod::sa: return "bcs-sa";
  }
  return "?";
}

BenchMethod bench_method_from_string(const std::string& s) {
  for (const BenchMethod m :
       {BenchMethod::identity, BenchMethod::random, BenchMethod::random_best_of_r, BenchMethod::sa}) {
    if (to_string(m) == s) return m;
  }
  throw InputError("unknown bench method '" + s + "'");
}

namespace {

struct Sample {
  double nodes = 0.0;
  double wall_ms = 0.0;
};

Sample run_solve(const BoolSystem& s, const Ordering& o) {
  SolveOptions opts;
  opts.keep_sets = false;
  const SolveResult r = solve_with_ordering(s, o, opts);
  return {static_cast<double>(r.cost.node_count), r.cost.wall_ms};
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

}  // namespace

std::vector<BenchRow> bench(const std::vector<BenchSystem>& systems, const BenchConfig& cfg, const GbtModel* model,
                            const ResidualStats* stats) {
  if (cfg.methods.empty()) throw InputError("no bench methods given");
  if (cfg.repetitions < 1) throw InputError("repetitions must be at least 1");
  if (cfg.r < 1) throw InputError("r must be at least 1");
  const bool wants_sa = std::find(cfg.methods.begin(), cfg.methods.end(), BenchMethod::sa) != cfg.methods.end();
  if (wants_sa) {
    if (!model) throw InputError("bcs-sa needs a model");
    for (const BenchSystem& b : systems) {
      if (b.system.n != model->n_features) {
        throw InputError(b.name + ": n=" + std::to_string(b.system.n) + " does not match the model's " +
                         std::to_string(model->n_features) + " features");
      }
    }
    cfg.sa.validate();
  }
  const ResidualStats empty_stats;
  const ResidualStats& residuals = stats ? *stats : empty_stats;

  const std::size_t per_system = cfg.methods.size() * cfg.repetitions;
  std::vector<Sample> samples(systems.size() * per_system);
  parallel_for(samples.size(), cfg.jobs, [&](std::size_t t) {
    const std::size_t si = t / per_system;
    const BenchMethod method = cfg.methods[(t % per_system) / cfg.repetitions];
    const std::size_t rep = t % cfg.repetitions;
    const BoolSystem& s = systems[si].system;
    const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, si), rep);
    Sample out;
    switch (method) {
      case BenchMethod::identity:
        out = run_solve(s, Ordering::identity(s.n));
        break;
      case BenchMethod::random:
        out = run_solve(s, random_ordering(s.n, seed));
        break;
      case BenchMethod::random_best_of_r: {
        out = run_solve(s, random_ordering(s.n, mix_seed(seed, 0)));
        for (unsigned o = 1; o < cfg.r; ++o) {
          const Sample c = run_solve(s, random_ordering(s.n, mix_seed(seed, o)));
          if (c.nodes < out.nodes) out = c;
        }
        break;
      }
      case BenchMethod::sa: {
        SaConfig sa = cfg.sa;
        sa.seed = seed;
        sa.spot_check_every = 0;
        const OptimizeResult res = anneal(s.n, predictor_field(s, *model), residuals.residuals, sa);
        out = run_solve(s, res.best_ordering);
        break;
      }
    }
    samples[t] = out;
  });

  std::vector<BenchRow> rows;
  for (std::size_t si = 0; si < systems.size(); ++si) {
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      BenchRow row;
      row.problem = systems[si].name;
      row.method = to_string(cfg.methods[mi]);
      row.repetitions = cfg.repetitions;
      std::vector<double> wall;
      for (unsigned rep = 0; rep < cfg.repetitions; ++rep) {
        const Sample& s = samples[si * per_system + mi * cfg.repetitions + rep];
        row.nodes.push_back(s.nodes);
        wall.push_back(s.wall_ms);
      }
      row.median_nodes = median(row.nodes);
      row.median_wall_ms = median(wall);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string bench_to_text(const std::vector<BenchRow>& rows) {
  std::size_t wp = 7, wm = 6;
  for (const BenchRow& r : rows) {
    wp = std::max(wp, r.problem.size());
    wm = std::max(wm, r.method.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(wp)) << "problem" << "  " << std::setw(static_cast<int>(wm))
      << "method" << "  " << std::right << std::setw(5) << "reps" << "  " << std::setw(14) << "median_nodes" << "  "
      << std::setw(14) << "median_ms" << '\n';
  out << std::fixed;
  for (const BenchRow& r : rows) {
    out << std::left << std::setw(static_cast<int>(wp)) << r.problem << "  " << std::setw(static_cast<int>(wm))
        << r.method << "  " << std::right << std::setw(5) << r.repetitions << "  " << std::setw(14)
        << std::setprecision(1) << r.median_nodes << "  " << std::setw(14) << std::setprecision(3)
        << r.median_wall_ms << '\n';
  }
  return out.str();
}

std::string bench_to_csv(const std::vector<BenchRow>& rows, bool include_wall) {
  std::ostringstream out;
  out.precision(17);
  out << "problem,method,repetitions,median_nodes";
  if (include_wall) out << ",median_wall_ms";
  out << '\n';
  for (const BenchRow& r : rows) {
    out << r.problem << ',' << r.method << ',' << r.repetitions << ',' << r.median_nodes;
    if (include_wall) out << ',' << r.median_wall_ms;
    out << '\n';
  }
  return out.str();
}

}  // namespace bcsorder
