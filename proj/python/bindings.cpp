#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pdeconv/deconv.hpp"
#include "pdeconv/dictionary.hpp"
#include "pdeconv/errors.hpp"
#include "pdeconv/prox.hpp"

namespace py = pybind11;
using namespace pdeconv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a, const char* what) {
    if (a.ndim() != 2) throw InvalidArgument(std::string(what) + " must be a 2-D array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return Image(w, h, Vector(a.data(), a.data() + a.size()));
}

Vector to_vector(const Array& a) { return Vector(a.data(), a.data() + a.size()); }

Array from_image(const Image& img) {
    Array out({img.height(), img.width()});
    std::copy(img.data().begin(), img.data().end(), out.mutable_data());
    return out;
}

Array from_vector(const Vector& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

// A 2-D array is a centered kernel; its sum is left as given.
Kernel to_kernel(const Array& psf) { return Kernel::centered(to_image(psf, "psf")); }

DeconvProblem make_problem(const Image& counts, const Array& psf, double gamma, const std::string& dictionary,
                           const std::string& prior, double mu, int iters, double tol, int inner_iters) {
    DeconvProblem p{counts, make_circular_convolution(to_kernel(psf), counts.width(), counts.height()),
                    parse_dictionary(dictionary, counts.width(), counts.height())};
    p.gamma = gamma;
    p.prior = parse_prior(prior);
    p.splitting.mu = mu;
    p.splitting.max_outer = iters;
    p.splitting.tol = tol;
    p.compose.inner_iters = inner_iters;
    return p;
}

py::dict result_dict(const DeconvResult& r) {
    py::dict d;
    d["restored"] = from_image(r.restored);
    d["coefficients"] = from_vector(r.coefficients);
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["gamma"] = r.gamma_used;
    d["relative_change_trace"] = r.relative_change_trace;
    d["objective_trace"] = r.objective_trace;
    d["wall_time_s"] = r.wall_time_s;
    d["clip_mass"] = r.clip_mass;
    return d;
}

} // namespace

PYBIND11_MODULE(_pdeconv, m) {
    m.doc() = "Poisson deconvolution with sparsity priors";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

    m.def("eval_poisson", [](const Array& eta, const Array& y) { return eval_poisson(to_vector(eta), to_vector(y)); },
          py::arg("eta"), py::arg("counts"));
    m.def("grad_poisson",
          [](const Array& eta, const Array& y) { return from_vector(grad_poisson(to_vector(eta), to_vector(y))); },
          py::arg("eta"), py::arg("counts"));
    m.def("prox_poisson",
          [](const Array& x, double beta, const Array& y) {
              return from_vector(prox_poisson(to_vector(x), beta, to_vector(y)));
          },
          py::arg("x"), py::arg("beta"), py::arg("counts"));
    m.def("soft_threshold",
          [](const Array& a, double t) { return from_vector(soft_threshold(to_vector(a), t)); }, py::arg("x"),
          py::arg("threshold"));

    py::class_<FrameDictionary>(m, "Dictionary")
        .def(py::init([](const std::string& spec, int width, int height) {
                 return parse_dictionary(spec, width, height);
             }),
             py::arg("spec"), py::arg("width"), py::arg("height"))
        .def_property_readonly("name", &FrameDictionary::name)
        .def_property_readonly("tight", &FrameDictionary::tight)
        .def_property_readonly("image_dim", &FrameDictionary::image_dim)
        .def_property_readonly("coeff_dim", &FrameDictionary::coeff_dim)
        .def_property_readonly("bounds",
                               [](const FrameDictionary& d) { return py::make_tuple(d.bounds().lower, d.bounds().upper); })
        .def("analysis", [](const FrameDictionary& d, const Array& x) { return from_vector(d.analysis(to_vector(x))); })
        .def("synthesis",
             [](const FrameDictionary& d, const Array& a) { return from_vector(d.synthesis(to_vector(a))); })
        .def("empirical_bounds", [](const FrameDictionary& d, int probes) {
            const FrameBounds b = frame_bounds(d, probes);
            return py::make_tuple(b.lower, b.upper);
        }, py::arg("probes") = 100);

    m.def("box_kernel", [](int n) { return from_image(make_box_kernel(n).taps); }, py::arg("size"));
    m.def("synthetic_scene", [](int w, int h) { return from_image(synthetic_scene(w, h)); }, py::arg("width"),
          py::arg("height"));
    m.def("simulate",
          [](const Array& x, const Array& psf, double peak, std::uint64_t seed) {
              const Image img = to_image(x, "x_true");
              const LinearOperator h = make_circular_convolution(to_kernel(psf), img.width(), img.height());
              return from_image(simulate(img, h, peak, seed));
          },
          py::arg("x_true"), py::arg("psf"), py::arg("peak"), py::arg("seed") = 0);
    m.def("rescale_to_peak", [](const Array& x, double peak) { return from_image(rescale_to_peak(to_image(x, "x"), peak)); },
          py::arg("x"), py::arg("peak"));

    m.def("deconvolve",
          [](const Array& counts, const Array& psf, double gamma, const std::string& dictionary,
             const std::string& prior, double mu, int iters, double tol, int inner_iters) {
              const DeconvProblem p =
                  make_problem(to_image(counts, "counts"), psf, gamma, dictionary, prior, mu, iters, tol, inner_iters);
              DeconvResult r;
              {
                  py::gil_scoped_release release;
                  r = deconvolve(p);
              }
              return result_dict(r);
          },
          py::arg("counts"), py::arg("psf"), py::arg("gamma"), py::arg("dictionary") = "starlet:levels=3",
          py::arg("prior") = "synthesis", py::arg("mu") = 1.0, py::arg("iters") = 300, py::arg("tol") = 1e-5,
          py::arg("inner_iters") = 10);

    m.def("select_gamma",
          [](const Array& counts, const Array& psf, const std::vector<double>& grid, const std::string& dictionary,
             const std::string& prior, double mu, int iters, double tol, int inner_iters,
             const std::optional<Array>& truth, int threads) {
              const Image y = to_image(counts, "counts");
              const DeconvProblem p = make_problem(y, psf, 1.0, dictionary, prior, mu, iters, tol, inner_iters);
              std::optional<Image> ref;
              if (truth) ref = to_image(*truth, "truth");
              GcvSelection sel;
              {
                  py::gil_scoped_release release;
                  sel = select_gamma_gcv(grid, p, ref, threads);
              }
              py::list table;
              for (const GcvRow& row : sel.table) {
                  py::dict d;
                  d["gamma"] = row.gamma;
                  d["gcv"] = row.gcv;
                  d["mae"] = row.mae;
                  d["iterations"] = row.iterations;
                  d["converged"] = row.converged;
                  table.append(d);
              }
              py::dict out = result_dict(sel.best);
              out["gamma"] = sel.gamma;
              out["table"] = table;
              return out;
          },
          py::arg("counts"), py::arg("psf"), py::arg("grid"), py::arg("dictionary") = "starlet:levels=3",
          py::arg("prior") = "synthesis", py::arg("mu") = 1.0, py::arg("iters") = 300, py::arg("tol") = 1e-5,
          py::arg("inner_iters") = 10, py::arg("truth") = py::none(), py::arg("threads") = 0);

    m.def("richardson_lucy",
          [](const Array& counts, const Array& psf, int iters, const std::optional<Array>& x0) {
              const Image y = to_image(counts, "counts");
              const LinearOperator h = make_circular_convolution(to_kernel(psf), y.width(), y.height());
              Image start;
              if (x0) {
                  start = to_image(*x0, "x0");
              } else {
                  double mean = 0.0;
                  for (double v : y.data()) mean += v / static_cast<double>(y.size());
                  start = Image(y.width(), y.height(), mean);
              }
              Image x;
              {
                  py::gil_scoped_release release;
                  x = richardson_lucy(y, h, iters, start);
              }
              return from_image(x);
          },
          py::arg("counts"), py::arg("psf"), py::arg("iters"), py::arg("x0") = py::none());

    m.def("gcv_score",
          [](double gamma, const Array& counts, const Array& psf, const Array& restored, const Array& coeffs) {
              const Image y = to_image(counts, "counts");
              const LinearOperator h = make_circular_convolution(to_kernel(psf), y.width(), y.height());
              return gcv_score(gamma, y, h, to_image(restored, "restored"), to_vector(coeffs));
          },
          py::arg("gamma"), py::arg("counts"), py::arg("psf"), py::arg("restored"), py::arg("coefficients"));
    m.def("log_grid", &log_grid, py::arg("lo"), py::arg("hi"), py::arg("n"));
    m.def("mae", [](const Array& a, const Array& b) { return mae(to_image(a, "a"), to_image(b, "b")); });
    m.def("relative_mae",
          [](const Array& a, const Array& t) { return relative_mae(to_image(a, "a"), to_image(t, "truth")); });
}
