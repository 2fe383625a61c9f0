#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "renorm/char_variety.hpp"
#include "renorm/circle.hpp"
#include "renorm/error.hpp"
#include "renorm/giet.hpp"
#include "renorm/lab.hpp"
#include "renorm/moebius.hpp"
#include "renorm/piet.hpp"
#include "renorm/serialize.hpp"

namespace py = pybind11;
using namespace renorm;

namespace {

py::dict convergence_dict(const ConvergenceStudy& st) {
  py::list rows;
  for (const auto& r : st.rows) {
    py::dict d;
    d["n"] = r.n;
    d["x"] = r.x;
    d["delta"] = r.delta;
    d["d1"] = r.d1;
    d["max_log_distortion"] = r.max_log_distortion;
    d["affine_defect"] = r.affine_defect;
    d["above_floor"] = r.above_floor;
    rows.append(d);
  }
  py::dict out;
  out["rows"] = rows;
  out["delta_slope"] = st.delta_fit.slope;
  out["d1_slope"] = st.d1_fit.slope;
  out["d1_ratio"] = st.d1_fit.ratio();
  out["window"] = py::make_tuple(st.window_first, st.window_last);
  out["monotone_window"] = st.monotone_window;
  out["correlation"] = st.correlation;
  out["error"] = st.error ? py::object(py::str(st.error->what())) : py::object(py::none());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the renorm C++ library";
  py::register_exception<Error>(m, "RenormError", PyExc_RuntimeError);

  py::class_<Moebius>(m, "Moebius")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("a"), py::arg("b"), py::arg("c"),
           py::arg("d"))
      .def_static("affine", &Moebius::affine, py::arg("scale"), py::arg("shift"))
      .def_property_readonly("entries", &Moebius::entries)
      .def("__call__", &Moebius::apply)
      .def("derivative", &Moebius::derivative)
      .def("trace", &Moebius::trace)
      .def("inverse", &Moebius::inverse)
      .def("is_affine", &Moebius::is_affine, py::arg("tol") = 1e-12)
      .def("distance", &Moebius::distance)
      .def("__mul__", [](const Moebius& a, const Moebius& b) { return a * b; })
      .def("__repr__", [](const Moebius& x) {
        const auto& e = x.entries();
        return "Moebius(" + std::to_string(e[0]) + ", " + std::to_string(e[1]) + ", " +
               std::to_string(e[2]) + ", " + std::to_string(e[3]) + ")";
      });
  m.def("moebius_through", &moebius_through, py::arg("x"), py::arg("y"));
  m.def("trace_from_break_size", &trace_from_break_size);

  py::enum_<Side>(m, "Side").value("Top", Side::Top).value("Bottom", Side::Bottom);

  py::class_<MarkedPermutation>(m, "MarkedPermutation")
      .def(py::init([](std::vector<Letter> top, std::vector<Letter> bottom) {
        MarkedPermutation p{std::move(top), std::move(bottom)};
        if (!p.valid()) throw Error(ErrorCode::SpecInvalid, "invalid marked permutation");
        return p;
      }))
      .def_readonly("top", &MarkedPermutation::top)
      .def_readonly("bottom", &MarkedPermutation::bottom)
      .def("size", &MarkedPermutation::size)
      .def("is_circular", &MarkedPermutation::is_circular)
      .def("__eq__", [](const MarkedPermutation& a, const MarkedPermutation& b) { return a == b; })
      .def("__repr__", &MarkedPermutation::str);
  m.def("rotation_permutation", &rotation_permutation, py::arg("m"), py::arg("shift"));
  m.def("rauzy_class", &rauzy_class);

  py::class_<Giet>(m, "Giet")
      .def_static("rotation", &Giet::rotation)
      .def_static("linear", &Giet::linear, py::arg("perm"), py::arg("lengths"))
      .def("size", &Giet::size)
      .def_property_readonly("perm", &Giet::perm)
      .def("u_top", &Giet::u_top)
      .def("top_length", &Giet::top_length)
      .def("is_piet", &Giet::is_piet)
      .def("__call__", [](const Giet& t, double x, int order) { return t.eval(x, order); },
           py::arg("x"), py::arg("order") = 0)
      .def("inverse", &Giet::inverse);

  py::class_<CircleMap>(m, "CircleMap")
      .def_static("rotation", &CircleMap::rotation)
      .def_property_readonly("breaks", &CircleMap::breaks)
      .def_property_readonly("sizes", &CircleMap::sizes)
      .def("__call__", &CircleMap::operator())
      .def("lift", &CircleMap::lift)
      .def("derivative", &CircleMap::derivative)
      .def("inverse", &CircleMap::inverse)
      .def("log_derivative_variation", &CircleMap::log_derivative_variation);
  m.def(
      "make_break_map",
      [](std::vector<double> breaks, std::vector<double> sizes, double beta, double bump,
         std::uint64_t seed) { return make_break_map(breaks, sizes, beta, {bump, seed}); },
      py::arg("breaks"), py::arg("sizes"), py::arg("beta"), py::arg("bump") = 0.0,
      py::arg("seed") = 0);
  m.def(
      "make_break_map_with_rotation",
      [](std::vector<double> breaks, std::vector<double> sizes, double target, double bump,
         std::uint64_t seed, int digits) {
        return make_break_map_with_rotation(breaks, sizes, target, {bump, seed}, digits);
      },
      py::arg("breaks"), py::arg("sizes"), py::arg("rotation"), py::arg("bump") = 0.0,
      py::arg("seed") = 0, py::arg("digits") = 30);
  m.def("to_giet", &to_giet, py::arg("map"), py::arg("cut") = 0);
  m.def(
      "rotation_number",
      [](const CircleMap& t) {
        const auto r = rotation_number(t);
        return py::make_tuple(r.rho, r.digits);
      },
      py::arg("map"));
  m.def(
      "denjoy_koksma_check",
      [](const CircleMap& t, int n, int points) {
        DenjoyKoksmaOptions o;
        o.points = points;
        const auto r = denjoy_koksma_check(t, log_derivative_observable(t), n, o);
        py::dict d;
        d["q"] = r.q;
        d["max_abs_sum"] = r.max_abs_sum;
        d["variation"] = r.variation;
        d["bound"] = r.bound;
        d["holds"] = r.holds;
        return d;
      },
      py::arg("map"), py::arg("n"), py::arg("points") = 1000);

  m.def(
      "cf_digits", [](const Giet& t, int n) { return cf_digits(t, n); }, py::arg("giet"),
      py::arg("n"));
  m.def(
      "tower_scales",
      [](const Giet& t, int n) {
        std::vector<double> xs;
        for (const auto& lv : build_tower(t, n, false).levels) xs.push_back(lv.x);
        return xs;
      },
      py::arg("giet"), py::arg("n"));
  m.def(
      "partition_decay",
      [](const Giet& t, int n) {
        const DecayFit f = partition_decay(t, n);
        py::dict d;
        d["alpha"] = f.alpha;
        d["r2"] = f.r2;
        d["deltas"] = f.deltas;
        d["floor_hit"] = f.floor_hit;
        return d;
      },
      py::arg("giet"), py::arg("n"));
  m.def(
      "convergence_study",
      [](const Giet& t, int n, const std::string& precision) {
        return convergence_dict(convergence_study(
            t, n, precision == "extended" ? Precision::Extended : Precision::Double));
      },
      py::arg("giet"), py::arg("n"), py::arg("precision") = "double");
  m.def("distance_to_P", [](const Giet& t) { return distance_to_P(t); });

  py::class_<Piet>(m, "Piet")
      .def(py::init<Giet>())
      .def_property_readonly("giet", &Piet::giet)
      .def_property_readonly("maps", &Piet::maps)
      .def("points", &Piet::points)
      .def("affine_defect", [](const Piet& p) { return affine_defect(p); })
      .def("break_sizes", [](const Piet& p) { return break_sizes(p); });
  m.def(
      "random_piet",
      [](const MarkedPermutation& pi, std::uint64_t seed, bool separated) {
        std::mt19937_64 rng(seed);
        RandomPietOptions o;
        o.separated = separated;
        return random_piet(pi, rng, o);
      },
      py::arg("perm"), py::arg("seed"), py::arg("separated") = true);

  py::class_<AttractorPoint>(m, "AttractorPoint")
      .def_readonly("piet", &AttractorPoint::piet)
      .def_readonly("sizes", &AttractorPoint::sizes);
  m.def("normalise_into_E", &normalise_into_E);
  m.def(
      "slice_dimension",
      [](const AttractorPoint& ap, bool with_traces) {
        return slice_constraint_rank(ap, ap.sizes, with_traces);
      },
      py::arg("point"), py::arg("with_traces") = true);

  py::class_<Representation>(m, "Representation")
      .def_readonly("images", &Representation::images)
      .def("puncture_traces", [](const Representation& r) { return puncture_traces(r); })
      .def("to_json", [](const Representation& r) { return io::to_json(r).dump(); });
  m.def("psi", &psi);
  m.def("psi_inverse", &psi_inverse);
  m.def("functoriality_residual", &functoriality_residual);

  // Lab entry points take and return JSON text; the Python wrapper converts.
  m.def("_validate_spec", [](const std::string& text) {
    return lab::validate(lab::Json::parse(text));
  });
  m.def("_run_spec", [](const std::string& text, bool write) {
    const auto report = lab::run(lab::parse_spec(lab::Json::parse(text)));
    if (write) lab::write_outputs(report);
    return py::make_tuple(lab::to_json(report).dump(), lab::to_csv(report));
  });
}
