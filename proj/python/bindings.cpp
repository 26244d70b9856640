#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "roboost/boost.hpp"
#include "roboost/harness.hpp"
#include "roboost/risk.hpp"
#include "roboost/scenario.hpp"

namespace py = pybind11;
using namespace roboost;

namespace {

Labeling labeling(const std::vector<Label>& v) { return Labeling(v); }

std::vector<Point> points(const PointSet& s) { return s.to_vector(); }

PointSet point_set(std::size_t n, const std::vector<Point>& v) {
  PointSet s(n);
  for (Point x : v) {
    if (x >= n) throw InvalidArgument("point " + std::to_string(x) + " is out of range");
    s.insert(x);
  }
  return s;
}

PerturbationRelation metric_ball(std::size_t n, const std::string& metric, double radius, std::size_t grid_width,
                                 std::vector<Label> labels) {
  MetricSpec spec{metric, grid_width, radius};
  return make_metric_ball(InstanceSpace(n, std::move(labels)), spec.metric(), radius);
}

CascadePredictor cascade(const std::vector<std::pair<std::vector<Label>, PerturbationRelation>>& stages,
                         const std::string& fallback, Label fixed) {
  Fallback f;
  if (fallback == "first_stage_raw") {
    f.rule = FallbackRule::first_stage_raw;
  } else if (fallback == "last_stage_raw") {
    f.rule = FallbackRule::last_stage_raw;
  } else if (fallback == "fixed") {
    f = {FallbackRule::fixed_label, fixed};
  } else {
    throw InvalidArgument("unknown fallback '" + fallback + "'");
  }
  CascadePredictor c(f);
  for (const auto& [h, u] : stages) c.add_stage(labeling(h), share(u));
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact-measure robustness boosting on finite spaces";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<EmptyEvent>(m, "EmptyEvent", PyExc_RuntimeError);
  py::register_exception<BudgetExhausted>(m, "BudgetExhausted", PyExc_RuntimeError);

  py::class_<PerturbationRelation>(m, "Relation")
      .def(py::init([](const std::vector<std::vector<Point>>& adjacency, std::vector<Label> labels) {
             return PerturbationRelation::from_adjacency(InstanceSpace(adjacency.size(), std::move(labels)),
                                                         adjacency);
           }),
           py::arg("adjacency"), py::arg("labels") = std::vector<Label>{-1, 1})
      .def_property_readonly("point_count", &PerturbationRelation::point_count)
      .def("neighbors", [](const PerturbationRelation& u, Point x) { return points(u(x)); })
      .def("adjacency", &PerturbationRelation::adjacency)
      .def_property_readonly("reflexive", &PerturbationRelation::is_reflexive)
      .def_property_readonly("symmetric", &PerturbationRelation::is_symmetric)
      .def("__eq__", [](const PerturbationRelation& a, const PerturbationRelation& b) { return a == b; });

  m.def("metric_ball", &metric_ball, py::arg("n"), py::arg("metric") = "path", py::arg("radius") = 1.0,
        py::arg("grid_width") = 0, py::arg("labels") = std::vector<Label>{-1, 1},
        "U(x) = {z : d(x, z) <= radius} for metric path, grid_l1 or grid_linf");
  m.def("invert", &invert);
  m.def("compose_inverse", &compose_inverse);

  m.def(
      "condition",
      [](const std::vector<double>& mass, const std::vector<Point>& event) {
        const auto d = condition(Distribution(mass), point_set(mass.size(), event));
        return std::vector<double>(d.masses().begin(), d.masses().end());
      },
      py::arg("mass"), py::arg("event"));
  m.def("is_robust_realizable",
        [](const std::vector<double>& mass, const std::vector<Label>& c, const PerturbationRelation& u) {
          return check_robust_realizable(Distribution(mass), labeling(c), u);
        });

  m.def("robust_region",
        [](const std::vector<Label>& h, const PerturbationRelation& u) { return points(robust_region(labeling(h), u)); });
  m.def(
      "selective_predict",
      [](const std::vector<Label>& h, const PerturbationRelation& u, Point z) -> std::optional<Label> {
        const auto out = selective_predict(labeling(h), u, z);
        if (out.abstains()) return std::nullopt;
        return out.label();
      },
      "The common label of h over U^-1(z), or None when it abstains");
  m.def(
      "cascade_predict",
      [](const std::vector<std::pair<std::vector<Label>, PerturbationRelation>>& stages, const std::string& fallback,
         Label fixed) {
        const auto table = cascade(stages, fallback, fixed).tabulate();
        return std::vector<Label>(table.values().begin(), table.values().end());
      },
      py::arg("stages"), py::arg("fallback") = "first_stage_raw", py::arg("fixed") = 0,
      "Tabulated cascade over every query point");
  m.def(
      "majority_vote",
      [](const std::vector<std::vector<Label>>& members, std::vector<Label> labels) {
        std::vector<Labeling> hs;
        for (const auto& h : members) hs.push_back(labeling(h));
        if (hs.empty()) throw InvalidArgument("majority vote needs at least one member");
        const auto table = MajorityPredictor(InstanceSpace(hs.front().size(), std::move(labels)), hs).tabulate();
        return std::vector<Label>(table.values().begin(), table.values().end());
      },
      py::arg("members"), py::arg("labels") = std::vector<Label>{-1, 1});

  m.def("robust_risk", [](const std::vector<Label>& h, const std::vector<double>& mass, const std::vector<Label>& c,
                          const PerturbationRelation& u) {
    return robust_risk(labeling(h), Distribution(mass), labeling(c), u);
  });
  m.def("natural_error", [](const std::vector<Label>& h, const std::vector<double>& mass, const std::vector<Label>& c) {
    return natural_error(labeling(h), Distribution(mass), labeling(c));
  });
  m.def("robustness_mass", [](const std::vector<Label>& h, const std::vector<double>& mass,
                              const PerturbationRelation& u) {
    return robustness_mass(labeling(h), Distribution(mass), u);
  });
  m.def(
      "robust_shattering_dim",
      [](const std::vector<std::vector<Label>>& concepts, const PerturbationRelation& u, std::size_t cap) {
        std::vector<Labeling> cs;
        for (const auto& c : concepts) cs.push_back(labeling(c));
        return robust_shattering_dim(cs, u, {cap, 24});
      },
      py::arg("concepts"), py::arg("relation"), py::arg("cap") = 4);

  m.def("roboost_rounds", &roboost_rounds);
  m.def("alpha_rounds", &alpha_rounds);

  m.def(
      "build_counterexample",
      [](std::size_t k, const std::vector<Label>& y, const std::vector<double>& mass) {
        return scenario_to_json(build_counterexample(k, y, mass)).dump();
      },
      py::arg("k"), py::arg("labels"), py::arg("mass"), "Scenario JSON text for the k-gadget space");
  m.def("procedures", &procedure_names);
  m.def(
      "validate_scenario",
      [](const std::string& text, const std::string& procedure) {
        const auto s = parse_scenario(text);
        if (!procedure.empty()) check_scenario(s, procedure);
        return s.space.point_count();
      },
      py::arg("text"), py::arg("procedure") = "");
  m.def(
      "run_scenario",
      [](const std::string& text, const std::string& procedure, std::size_t trials, std::optional<std::uint64_t> seed,
         std::size_t threads) {
        const auto s = parse_scenario(text);
        Report report;
        {
          py::gil_scoped_release release;
          report = run_scenario(s, procedure, {trials, seed, threads});
        }
        return py::make_tuple(report.document.dump(), report.csv);
      },
      py::arg("text"), py::arg("procedure"), py::arg("trials") = 1, py::arg("seed") = py::none(),
      py::arg("threads") = 0, "Returns (report JSON text, CSV text)");
}
