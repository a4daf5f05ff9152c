#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "dynbo/acquisition.hpp"
#include "dynbo/errors.hpp"
#include "dynbo/geometry.hpp"
#include "dynbo/gp.hpp"
#include "dynbo/harness.hpp"
#include "dynbo/kernels.hpp"
#include "dynbo/selftest.hpp"

namespace py = pybind11;
using namespace dynbo;

namespace {

using SampleTuple = std::tuple<double, double, int, double>;  // x, y, t, value
using QueryTuple = std::tuple<double, double, double>;       // x, y, t

SpatioTemporalKernel make_kernel(const std::string& family, double spatial_ls, double temporal_ls) {
  const MaternFamily f = parse_matern_family(family);
  return {{f, 1.0, spatial_ls}, {f, 1.0, temporal_ls}};
}

std::vector<Sample> to_samples(const std::vector<SampleTuple>& in) {
  std::vector<Sample> out;
  out.reserve(in.size());
  for (const auto& [x, y, t, v] : in) out.push_back({{x, y}, t, 1.0, v});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spatio-temporal GP, MS-EI acquisition and the tracking harness";
  m.attr("__version__") = DYNBO_VERSION;

  static py::exception<Error> base(m, "ErrorBase", PyExc_RuntimeError);
  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      py::set_error(invalid, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<double, double, double, double>(), py::arg("cx"), py::arg("cy"), py::arg("width"), py::arg("height"))
      .def_static("from_top_left", &BoundingBox::from_top_left, py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("cx", &BoundingBox::cx)
      .def_readwrite("cy", &BoundingBox::cy)
      .def_readwrite("width", &BoundingBox::width)
      .def_readwrite("height", &BoundingBox::height)
      .def("area", &BoundingBox::area)
      .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
      .def("__repr__", [](const BoundingBox& b) {
        return "BoundingBox(cx=" + std::to_string(b.cx) + ", cy=" + std::to_string(b.cy) +
               ", width=" + std::to_string(b.width) + ", height=" + std::to_string(b.height) + ")";
      });

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("parse_groundtruth_line", &parse_groundtruth_line, py::arg("line"), py::arg("line_number") = 1);

  m.def(
      "kernel_eval",
      [](const std::string& family, double r, double variance, double lengthscale) {
        return kernel_eval({parse_matern_family(family), variance, lengthscale}, r);
      },
      py::arg("family"), py::arg("r"), py::arg("variance") = 1.0, py::arg("lengthscale") = 1.0);

  m.def(
      "st_kernel_eval",
      [](std::array<double, 2> x1, double t1, std::array<double, 2> x2, double t2, double spatial_ls,
         double temporal_ls, const std::string& family) {
        return st_kernel_eval(make_kernel(family, spatial_ls, temporal_ls), x1, t1, x2, t2);
      },
      py::arg("x1"), py::arg("t1"), py::arg("x2"), py::arg("t2"), py::arg("spatial_lengthscale") = 0.2,
      py::arg("temporal_lengthscale") = 2.0, py::arg("family") = "matern52");

  m.def(
      "gp_fit_predict",
      [](const std::vector<SampleTuple>& samples, const std::vector<QueryTuple>& queries, double noise,
         double spatial_ls, double temporal_ls, const std::string& family) {
        const auto model = gp_fit(to_samples(samples), make_kernel(family, spatial_ls, temporal_ls), noise);
        std::vector<Query> q;
        for (const auto& [x, y, t] : queries) q.push_back({{x, y}, t});
        std::vector<std::pair<double, double>> out;
        for (const auto& p : gp_predict(model, q)) out.emplace_back(p.mean, p.variance);
        return out;
      },
      py::arg("samples"), py::arg("queries"), py::arg("noise") = 1e-6, py::arg("spatial_lengthscale") = 0.2,
      py::arg("temporal_lengthscale") = 2.0, py::arg("family") = "matern52",
      "Samples are (x, y, t, value) tuples, queries (x, y, t). Returns (mean, variance) pairs.");

  m.def(
      "gp_log_marginal_likelihood",
      [](const std::vector<SampleTuple>& samples, double noise, double spatial_ls, double temporal_ls,
         const std::string& family) {
        return log_marginal_likelihood(gp_fit(to_samples(samples), make_kernel(family, spatial_ls, temporal_ls), noise));
      },
      py::arg("samples"), py::arg("noise") = 1e-6, py::arg("spatial_lengthscale") = 0.2,
      py::arg("temporal_lengthscale") = 2.0, py::arg("family") = "matern52");

  m.def("expected_improvement", &expected_improvement, py::arg("mean"), py::arg("sd"), py::arg("incumbent"),
        py::arg("xi"));
  m.def("probability_of_improvement", &probability_of_improvement, py::arg("mean"), py::arg("sd"),
        py::arg("incumbent"), py::arg("xi"));
  m.def(
      "ms_ei_xi",
      [](const std::vector<double>& values, double alpha, double q, double xi_max) {
        SearchHistory h;
        for (std::size_t i = 0; i < values.size(); ++i) h.record({static_cast<double>(i), 0.0}, values[i]);
        AcqConfig cfg;
        cfg.alpha = alpha;
        cfg.q = q;
        cfg.xi_max = xi_max;
        return ms_ei_xi(h, cfg);
      },
      py::arg("values"), py::arg("alpha") = 1.0, py::arg("q") = 1.1, py::arg("xi_max") = 20.0);

  m.def(
      "gp_selftest",
      [](int instances, std::uint64_t seed, double tol) {
        const auto s = selftest::run_gp_selftest(instances, seed, tol);
        py::dict d;
        d["instances"] = s.instances;
        d["failures"] = s.failures;
        d["max_mean_error"] = s.max_mean_error;
        d["max_variance_error"] = s.max_variance_error;
        d["max_lml_error"] = s.max_lml_error;
        d["passed"] = s.passed();
        return d;
      },
      py::arg("instances") = 50, py::arg("seed") = 1, py::arg("tol") = 1e-8);

  py::class_<DopBenchResult>(m, "DopBenchResult")
      .def_readonly("mean_error", &DopBenchResult::mean_error)
      .def_readonly("cell_size", &DopBenchResult::cell_size)
      .def_readonly("oracle_calls", &DopBenchResult::oracle_calls)
      .def_property_readonly("errors",
                             [](const DopBenchResult& r) {
                               std::vector<double> e;
                               for (const auto& f : r.frames) e.push_back(f.error);
                               return e;
                             })
      .def("csv", &dop_bench_csv);

  m.def(
      "run_dop_benchmark",
      [](int frames, double noise_sd, std::uint64_t seed, const std::string& acquisition, bool random_sampling,
         double fixed_xi) {
        DopBenchConfig cfg;
        cfg.frames = frames;
        cfg.noise_sd = noise_sd;
        cfg.seed = seed;
        cfg.sdbta.seed = seed;
        cfg.sdbta.acq.kind = parse_acquisition_kind(acquisition);
        cfg.sdbta.acq.fixed_xi = fixed_xi;
        cfg.sdbta.random_sampling = random_sampling;
        return run_dop_benchmark(cfg);
      },
      py::arg("frames") = 50, py::arg("noise_sd") = 0.0, py::arg("seed") = 0, py::arg("acquisition") = "msei",
      py::arg("random_sampling") = false, py::arg("fixed_xi") = 0.01);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("tracker", &EvalReport::tracker)
      .def_readonly("frames", &EvalReport::frames)
      .def_readonly("trace", &EvalReport::trace)
      .def_readonly("mean_iou", &EvalReport::mean_iou)
      .def_readonly("std_iou", &EvalReport::std_iou)
      .def_readonly("oracle_calls", &EvalReport::oracle_calls)
      .def_readonly("complete", &EvalReport::complete);

  m.def(
      "run_translating_clip",
      [](const std::string& tracker, std::uint64_t seed, int frames, std::array<double, 2> velocity) {
        TranslatingClipConfig cc;
        cc.seed = seed;
        cc.frames = frames;
        cc.velocity = velocity;
        const auto seq = make_translating_clip(cc);
        if (tracker == "tm") return run_baseline_tm(seq);
        if (tracker != "sdbta") throw InvalidArgument("tracker must be 'sdbta' or 'tm'");
        SdbtaEvalTracker t(std::make_unique<NccOracle>(), SdbtaConfig{});
        return run_eval(t, seq);
      },
      py::arg("tracker") = "sdbta", py::arg("seed") = 7, py::arg("frames") = 10,
      py::arg("velocity") = std::array<double, 2>{2.0, 0.0},
      "Evaluates a tracker on a generated clip of a textured object moving at `velocity` px/frame.");
}
