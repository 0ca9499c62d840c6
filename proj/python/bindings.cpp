#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bcsorder/annealer.hpp"
#include "bcsorder/errors.hpp"
#include "bcsorder/features.hpp"
#include "bcsorder/instances.hpp"
#include "bcsorder/predictor.hpp"
#include "bcsorder/solver.hpp"

namespace py = pybind11;
using namespace bcsorder;

namespace {

Ordering ordering_or_identity(const std::optional<std::vector<unsigned>>& perm, unsigned n) {
  return perm ? Ordering(*perm) : Ordering::identity(n);
}

struct LoadedModel {
  GbtModel model;
  ResidualStats stats;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Boolean characteristic-set solving with learned variable orderings";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<LoadError>(m, "LoadError", PyExc_OSError);

  py::class_<BoolSystem>(m, "System")
      .def_static("parse", &parse_system, py::arg("text"))
      .def_static("load", &load_system, py::arg("path"))
      .def("save", [](const BoolSystem& s, const std::string& path) { save_system(s, path); }, py::arg("path"))
      .def_readonly("n", &BoolSystem::n)
      .def_property_readonly("num_polys", [](const BoolSystem& s) { return s.polys.size(); })
      .def("__str__", &format_system)
      .def("__eq__", [](const BoolSystem& a, const BoolSystem& b) { return a == b; });

  m.def(
      "generate",
      [](unsigned n, unsigned num_polys, unsigned degree, double density, bool planted, std::uint64_t seed) {
        return gen_random_system({n, num_polys, degree, density, planted, seed});
      },
      py::arg("n"), py::arg("m"), py::arg("degree") = 2, py::arg("density") = 0.5, py::arg("planted") = true,
      py::arg("seed") = 0);

  m.def("spectrum", &spectrum, py::arg("system"));
  m.def("random_ordering", [](unsigned n, std::uint64_t seed) {
    const Ordering o = random_ordering(n, seed);
    return std::vector<unsigned>(o.perm().begin(), o.perm().end());
  }, py::arg("n"), py::arg("seed"));

  m.def(
      "brute_force",
      [](const BoolSystem& s) {
        std::vector<std::string> out;
        for (const Assignment a : brute_force_solve(s)) out.push_back(format_bits(a, s.n));
        return out;
      },
      py::arg("system"));

  m.def(
      "solve_json",
      [](const BoolSystem& s, const std::optional<std::vector<unsigned>>& ordering, std::uint64_t cap,
         bool emit_sets) {
        const Ordering o = ordering_or_identity(ordering, s.n);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = solve_with_ordering(s, o, {.cap = cap, .keep_sets = emit_sets});
        }
        return solve_result_to_json(r, emit_sets);
      },
      py::arg("system"), py::arg("ordering") = py::none(), py::arg("cap") = kDefaultSolutionCap,
      py::arg("emit_sets") = false);

  py::class_<LoadedModel>(m, "Model")
      .def_static("load", [](const std::string& path) { return LoadedModel{load_model(path), load_residual_stats(path)}; },
                  py::arg("path"))
      .def_static(
          "train",
          [](const std::vector<std::vector<double>>& features, const std::vector<double>& costs, int n_estimators,
             double learning_rate, const std::string& transform, std::uint64_t seed) {
            TrainConfig cfg;
            cfg.n_estimators = n_estimators;
            cfg.learning_rate = learning_rate;
            cfg.transform = target_transform_from_string(transform);
            cfg.seed = seed;
            TrainResult r;
            {
              py::gil_scoped_release release;
              r = train(features, costs, cfg);
            }
            return LoadedModel{std::move(r.model), std::move(r.stats)};
          },
          py::arg("features"), py::arg("costs"), py::arg("n_estimators") = 1000, py::arg("learning_rate") = 0.01,
          py::arg("transform") = "log1p_nodes", py::arg("seed") = 0)
      .def("save", [](const LoadedModel& lm, const std::string& path) { save_model(lm.model, path, &lm.stats); },
           py::arg("path"))
      .def_property_readonly("n_features", [](const LoadedModel& lm) { return lm.model.n_features; })
      .def_property_readonly("num_trees", [](const LoadedModel& lm) { return lm.model.trees.size(); })
      .def_property_readonly("transform", [](const LoadedModel& lm) { return to_string(lm.model.transform); })
      .def("predict", [](const LoadedModel& lm, const std::vector<double>& x) { return lm.model.predict(x); },
           py::arg("features"))
      .def(
          "predict_cost",
          [](const LoadedModel& lm, const BoolSystem& s, const std::optional<std::vector<unsigned>>& ordering) {
            const Ordering o = ordering_or_identity(ordering, s.n);
            return lm.model.predict(spectrum(apply_ordering(s, o)));
          },
          py::arg("system"), py::arg("ordering") = py::none());

  m.def(
      "optimize_json",
      [](const BoolSystem& s, const LoadedModel& lm, int iterations, double alpha, double beta, double epsilon,
         std::optional<unsigned> pool, std::optional<double> t0, std::uint64_t seed) {
        SaConfig cfg;
        cfg.iterations = iterations;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.epsilon_explore = epsilon;
        cfg.pool = pool;
        cfg.t0 = t0;
        cfg.seed = seed;
        OptimizeResult r;
        {
          py::gil_scoped_release release;
          r = optimize(s, lm.model, lm.stats, cfg);
        }
        return optimize_result_to_json(r);
      },
      py::arg("system"), py::arg("model"), py::arg("iterations") = 500, py::arg("alpha") = 0.95,
      py::arg("beta") = 0.5, py::arg("epsilon") = 0.1, py::arg("pool") = py::none(), py::arg("t0") = py::none(),
      py::arg("seed") = 0);
}
