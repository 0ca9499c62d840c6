#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcsorder/analysis.hpp"
#include "bcsorder/annealer.hpp"
#include "bcsorder/bench.hpp"
#include "bcsorder/dataset.hpp"
#include "bcsorder/errors.hpp"
#include "bcsorder/instances.hpp"
#include "bcsorder/predictor.hpp"
#include "bcsorder/solver.hpp"
#include "bcsorder/theorem.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bcsorder;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out;
};

struct InstanceFlags {
  unsigned n = 14;
  std::optional<unsigned> m;
  unsigned degree = 2;
  std::optional<double> density;
  std::optional<double> terms;
  bool non_planted = false;

  void attach(CLI::App* app) {
    app->add_option("--n", n, "Variable count");
    app->add_option("--m", m, "Polynomial count (default n/2)");
    app->add_option("--degree", degree, "Maximum monomial degree");
    auto* d = app->add_option("--density", density, "Monomial inclusion probability");
    app->add_option("--terms", terms, "Expected non-constant terms per polynomial (sets density)")->excludes(d);
    app->add_flag("--non-planted", non_planted, "Do not plant a solution");
  }

  InstanceSpec spec(std::uint64_t seed) const {
    InstanceSpec s = desk_instance(n, seed);
    if (m) s.m = *m;
    s.degree = degree;
    if (density) s.density = *density;
    else s.density = density_for_terms(n, degree, terms.value_or(5.0));
    s.planted = !non_planted;
    return s;
  }
};

struct SaFlags {
  int iters = 500;
  double alpha = 0.9;
  double beta = 0.1;
  std::size_t window = 20;
  std::optional<unsigned> pool;
  double epsilon = 0.1;
  std::optional<double> t0;

  void attach(CLI::App* app) {
    app->add_option("--iters", iters, "Annealing iterations K");
    app->add_option("--alpha", alpha, "Cooling factor");
    app->add_option("--beta", beta, "Residual-variance sensitivity of cooling");
    app->add_option("--window", window, "Residual window length h");
    app->add_option("--pool", pool, "Candidate swaps per iteration q");
    app->add_option("--epsilon", epsilon, "Probability of a uniform pick from the pool");
    app->add_option("--t0", t0, "Initial temperature (default calibrated)");
  }

  SaConfig config(std::uint64_t seed) const {
    SaConfig c;
    c.iterations = iters;
    c.alpha = alpha;
    c.beta = beta;
    c.window = window;
    c.pool = pool;
    c.epsilon_explore = epsilon;
    c.t0 = t0;
    c.seed = seed;
    return c;
  }
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw InputError("cannot write " + g.out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

/// JSON to stdout, or <out>.json plus CSV siblings when --out is given.
void emit_report(const Globals& g, const std::string& json,
                 const std::vector<std::pair<std::string, std::string>>& csvs) {
  if (g.out.empty()) {
    std::cout << json << '\n';
    return;
  }
  write_file(g.out + ".json", json + "\n");
  for (const auto& [suffix, text] : csvs) write_file(g.out + suffix + ".csv", text);
}

Ordering parse_ordering_arg(const std::string& arg, unsigned n, std::uint64_t seed) {
  if (arg == "identity") return Ordering::identity(n);
  if (arg == "random") return random_ordering(n, seed);
  if (arg.rfind("random:", 0) == 0) return random_ordering(n, std::stoull(arg.substr(7)));
  std::ifstream f(arg);
  if (!f) throw InputError("cannot open ordering file " + arg);
  std::stringstream buf;
  buf << f.rdbuf();
  Ordering o = ordering_from_json(buf.str());
  if (o.size() != n) throw InputError("ordering length does not match n=" + std::to_string(n));
  return o;
}

std::vector<BoolSystem> load_or_generate(const std::vector<std::string>& files, unsigned count,
                                         const InstanceFlags& inst, std::uint64_t seed) {
  std::vector<BoolSystem> out;
  for (const auto& f : files) out.push_back(load_system(f));
  for (unsigned i = 0; i < count; ++i) out.push_back(gen_random_system(inst.spec(system_seed(seed, i))));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean polynomial system solving with learned variable orderings"};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str();
  app.add_option("--out", g.out, "Output path (file, or prefix for reports)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate random systems");
  InstanceFlags gen_inst;
  gen_inst.attach(gen);
  unsigned gen_count = 1;
  gen->add_option("--count", gen_count, "Number of systems; with --out, a directory");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a system with BCS");
  std::string solve_system;
  std::string solve_ordering = "identity";
  std::uint64_t solve_cap = kDefaultSolutionCap;
  bool solve_sets = false;
  bool solve_no_wall = false;
  solve->add_option("--system", solve_system, "System file")->required();
  solve->add_option("--ordering", solve_ordering, "identity | random | random:SEED | JSON file");
  solve->add_option("--cap", solve_cap, "Maximum solutions to enumerate");
  solve->add_flag("--emit-sets", solve_sets, "Include triangular sets");
  solve->add_flag("--no-wall", solve_no_wall, "Omit wall-clock fields");

  // collect
  auto* collect = app.add_subcommand("collect", "Collect a (spectrum, cost) dataset as JSON-Lines");
  InstanceFlags col_inst;
  col_inst.attach(collect);
  unsigned col_systems = 40;
  unsigned col_orderings = 50;
  std::string col_transform = "log1p_nodes";
  collect->add_option("--systems", col_systems, "Systems to generate");
  collect->add_option("--orderings", col_orderings, "Random orderings per system");
  collect->add_option("--transform", col_transform, "Target transform: log1p_nodes | raw");

  // train
  auto* trainc = app.add_subcommand("train", "Train the cost predictor");
  std::string train_data;
  TrainConfig tcfg;
  std::string train_features = "sqrt";
  trainc->add_option("--data", train_data, "Dataset (JSON-Lines)")->required();
  trainc->add_option("--n-estimators", tcfg.n_estimators, "Maximum boosting stages");
  trainc->add_option("--learning-rate", tcfg.learning_rate, "Shrinkage per stage");
  trainc->add_option("--max-depth", tcfg.max_depth, "Maximum tree depth");
  trainc->add_option("--min-samples-leaf", tcfg.min_samples_leaf, "Minimum rows per leaf");
  trainc->add_option("--subsample", tcfg.subsample, "Row fraction per stage");
  trainc->add_option("--validation-fraction", tcfg.validation_fraction, "Held-out fraction for early stopping");
  trainc->add_option("--n-iter-no-change", tcfg.n_iter_no_change, "Early-stopping patience");
  trainc->add_option("--features", train_features, "Features per split: sqrt | all");

  // optimize
  auto* opt = app.add_subcommand("optimize", "Anneal a variable ordering under a trained model");
  std::string opt_system, opt_model, opt_trace;
  unsigned opt_spot = 0;
  bool opt_verify = false;
  SaFlags opt_sa;
  opt->add_option("--system", opt_system, "System file")->required();
  opt->add_option("--model", opt_model, "Model file")->required();
  opt_sa.attach(opt);
  opt->add_option("--spot-check", opt_spot, "Solver spot check every s iterations (0 = off)");
  opt->add_option("--trace-out", opt_trace, "Write the move trace as JSON-Lines");
  opt->add_flag("--verify", opt_verify, "Solve under the best ordering and report true cost");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Cluster and correlation analysis of a dataset");
  std::string ana_data;
  AnalyzeOptions ana_opts;
  ana->add_option("--data", ana_data, "Dataset (JSON-Lines)")->required();
  ana->add_option("--k", ana_opts.k, "Cluster count");
  ana->add_option("--restarts", ana_opts.restarts, "k-means restarts");

  // verify
  auto* verify = app.add_subcommand("verify", "Monte-Carlo verification");
  verify->require_subcommand(1);
  auto* lemma = verify->add_subcommand("lemma1", "Correlation under additive predictor noise");
  double lemma_sigma = 1.0;
  std::vector<double> lemma_ehat{0.2, 0.6, 0.9};
  std::size_t lemma_samples = 100000;
  lemma->add_option("--sigma", lemma_sigma, "Cost standard deviation");
  lemma->add_option("--ehat", lemma_ehat, "Predictor RMSE values");
  lemma->add_option("--samples", lemma_samples, "Monte-Carlo samples per value");

  auto* impr = verify->add_subcommand("improvement", "Annealing gain against predictor error");
  std::string impr_model;
  std::vector<std::string> impr_files;
  unsigned impr_count = 20;
  InstanceFlags impr_inst;
  ImprovementConfig icfg;
  SaFlags impr_sa;
  impr->add_option("--model", impr_model, "Model file")->required();
  impr->add_option("--systems", impr_files, "System files (added to generated ones)");
  impr->add_option("--count", impr_count, "Systems to generate");
  impr_inst.attach(impr);
  impr->add_option("--noise", icfg.noise_levels, "Injected noise standard deviations");
  impr->add_option("--pure-noise-scale", icfg.pure_noise_scale, "Pure-noise predictor scale (0 = off)");
  impr->add_option("--baseline", icfg.baseline_orderings, "Random orderings in the baseline");
  impr_sa.attach(impr);

  // bench
  auto* benchc = app.add_subcommand("bench", "Median cost table per system and method");
  std::vector<std::string> bench_files;
  std::vector<std::string> bench_methods{"bcs-identity", "bcs-random-best-of-r", "bcs-sa"};
  std::string bench_model;
  BenchConfig bcfg;
  SaFlags bench_sa;
  bool bench_no_wall = false;
  benchc->add_option("--systems", bench_files, "System files")->required();
  benchc->add_option("--methods", bench_methods, "bcs-identity bcs-random bcs-random-best-of-r bcs-sa");
  benchc->add_option("--model", bench_model, "Model file (needed by bcs-sa)");
  benchc->add_option("--reps", bcfg.repetitions, "Repetitions per cell");
  benchc->add_option("--r", bcfg.r, "Orderings tried by bcs-random-best-of-r");
  benchc->add_flag("--no-wall", bench_no_wall, "Omit wall-clock column from CSV");
  bench_sa.attach(benchc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (gen_count <= 1) {
        emit(g, format_system(gen_random_system(gen_inst.spec(g.seed))));
      } else {
        if (g.out.empty()) throw InputError("--count > 1 needs --out <directory>");
        fs::create_directories(g.out);
        for (unsigned i = 0; i < gen_count; ++i) {
          std::ostringstream name;
          name << "sys_" << std::setw(3) << std::setfill('0') << i << ".anf";
          save_system(gen_random_system(gen_inst.spec(system_seed(g.seed, i))), (fs::path(g.out) / name.str()).string());
        }
      }
    } else if (*solve) {
      const BoolSystem s = load_system(solve_system);
      SolveOptions opts;
      opts.cap = solve_cap;
      opts.keep_sets = solve_sets;
      const Ordering o = parse_ordering_arg(solve_ordering, s.n, g.seed);
      emit(g, solve_result_to_json(solve_with_ordering(s, o, opts), solve_sets, !solve_no_wall));
    } else if (*collect) {
      if (g.out.empty()) throw InputError("collect needs --out <dataset.jsonl>");
      CollectConfig cfg;
      cfg.instance = col_inst.spec(0);
      cfg.systems = col_systems;
      cfg.orderings_per_system = col_orderings;
      cfg.seed = g.seed;
      cfg.jobs = g.jobs;
      cfg.transform = target_transform_from_string(col_transform);
      const std::size_t written = collect_dataset(cfg, g.out);
      std::cout << nlohmann::ordered_json{{"written", written}, {"path", g.out}}.dump() << '\n';
    } else if (*trainc) {
      if (g.out.empty()) throw InputError("train needs --out <model.json>");
      const auto records = read_dataset(train_data);
      if (records.empty()) throw InputError("dataset is empty");
      const FeatureTable table = to_feature_table(records);
      tcfg.transform = records.front().transform;
      tcfg.seed = g.seed;
      tcfg.feature_fraction = train_features == "all" ? FeatureFraction::all : FeatureFraction::sqrt;
      const TrainResult res = train(table.features, table.costs, tcfg);
      save_model(res.model, g.out, &res.stats);
      double mean = 0.0;
      for (const auto& r : records) mean += r.target;
      mean /= static_cast<double>(records.size());
      double ss = 0.0;
      for (const auto& r : records) ss += (r.target - mean) * (r.target - mean);
      nlohmann::ordered_json j;
      j["rows"] = records.size();
      j["trees"] = res.best_stage;
      j["validation_rmse"] = res.stats.rmse;
      j["validation_r2"] = res.validation_r2;
      j["target_sd"] = std::sqrt(ss / static_cast<double>(records.size() - 1));
      j["model"] = g.out;
      std::cout << j.dump(2) << '\n';
    } else if (*opt) {
      const BoolSystem s = load_system(opt_system);
      const GbtModel model = load_model(opt_model);
      const ResidualStats stats = load_residual_stats(opt_model);
      SaConfig cfg = opt_sa.config(g.seed);
      cfg.spot_check_every = opt_spot;
      const OptimizeResult res = optimize(s, model, stats, cfg);
      if (!opt_trace.empty()) {
        std::ofstream t(opt_trace);
        if (!t) throw InputError("cannot write " + opt_trace);
        for (const auto& rec : res.trace) t << trace_record_to_json(rec) << '\n';
      }
      auto j = nlohmann::ordered_json::parse(optimize_result_to_json(res));
      if (opt_verify) {
        SolveOptions so;
        so.keep_sets = false;
        j["true_node_count"] = solve_with_ordering(s, res.best_ordering, so).cost.node_count;
      }
      emit(g, j.dump(2));
    } else if (*ana) {
      ana_opts.seed = g.seed;
      const AnalysisReport rep = analyze(read_dataset(ana_data), ana_opts);
      emit_report(g, analysis_to_json(rep),
                  {{"_correlations", correlations_to_csv(rep)}, {"_clusters", clusters_to_csv(rep)}});
    } else if (*lemma) {
      const auto rows = verify_lemma1(lemma_sigma, lemma_ehat, lemma_samples, g.seed);
      emit_report(g, lemma1_to_json(rows), {{"", lemma1_to_csv(rows)}});
    } else if (*impr) {
      const GbtModel model = load_model(impr_model);
      const ResidualStats stats = load_residual_stats(impr_model);
      const auto corpus = load_or_generate(impr_files, impr_count, impr_inst, mix_seed(g.seed, 31));
      icfg.sa = impr_sa.config(g.seed);
      icfg.seed = g.seed;
      icfg.jobs = g.jobs;
      const TheoremReport rep = verify_improvement(corpus, model, stats, icfg);
      emit_report(g, theorem_to_json(rep), {{"", theorem_to_csv(rep)}});
    } else if (*benchc) {
      std::vector<BenchSystem> systems;
      for (const auto& f : bench_files) {
        try {
          systems.push_back({fs::path(f).stem().string(), load_system(f)});
        } catch (const std::exception& e) {
          std::cerr << "skipping " << f << ": " << e.what() << '\n';
        }
      }
      if (systems.empty()) throw InputError("no system could be loaded");
      bcfg.methods.clear();
      for (const auto& m : bench_methods) bcfg.methods.push_back(bench_method_from_string(m));
      bcfg.sa = bench_sa.config(g.seed);
      bcfg.seed = g.seed;
      bcfg.jobs = g.jobs;
      std::optional<GbtModel> model;
      ResidualStats stats;
      if (!bench_model.empty()) {
        model = load_model(bench_model);
        stats = load_residual_stats(bench_model);
      }
      const auto rows = bench(systems, bcfg, model ? &*model : nullptr, &stats);
      std::cout << bench_to_text(rows);
      if (!g.out.empty()) {
        write_file(g.out + ".txt", bench_to_text(rows));
        write_file(g.out + ".csv", bench_to_csv(rows, !bench_no_wall));
      }
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const LoadError& e) {
    std::cerr << "load error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
