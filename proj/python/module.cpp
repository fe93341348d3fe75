#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slabtbc/config.hpp"
#include "slabtbc/io.hpp"

namespace py = pybind11;
using namespace slabtbc;

namespace {

using ComplexArray = py::array_t<cdouble, py::array::c_style | py::array::forcecast>;

std::vector<cdouble> as_vector(const ComplexArray& a) {
    return std::vector<cdouble>(a.data(), a.data() + a.size());
}

py::array_t<cdouble> plane_array(const LateralGrid& g, const std::vector<cdouble>& v) {
    py::array_t<cdouble> out({g.modes_x(), g.modes_y()});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

spectral::VectorField field_from_arrays(const LateralGrid& g, const ComplexArray& c1,
                                        const ComplexArray& c2, const ComplexArray& c3) {
    spectral::VectorField f;
    f.c1 = as_vector(c1);
    f.c2 = as_vector(c2);
    f.c3 = as_vector(c3);
    return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral time-domain Maxwell slab solver with exact transparent boundaries";

    py::register_exception<ShapeError>(m, "ShapeError");
    py::register_exception<InvalidFrequencyError>(m, "InvalidFrequencyError");
    py::register_exception<ConfigurationError>(m, "ConfigurationError");
    py::register_exception<DataError>(m, "DataError");

    py::class_<LateralGrid>(m, "LateralGrid")
        .def(py::init<double, double, int, int, double, double, int>(), py::arg("period_x"),
             py::arg("period_y"), py::arg("modes_x"), py::arg("modes_y"), py::arg("h1"),
             py::arg("h2"), py::arg("nz"))
        .def_property_readonly("modes_x", &LateralGrid::modes_x)
        .def_property_readonly("modes_y", &LateralGrid::modes_y)
        .def_property_readonly("nz", &LateralGrid::nz)
        .def_property_readonly("h1", &LateralGrid::h1)
        .def_property_readonly("h2", &LateralGrid::h2)
        .def("xi", [](const LateralGrid& g, int ix, int iy) {
            const Xi x = g.xi(ix, iy);
            return std::make_pair(x.xi1, x.xi2);
        });

    m.def("forward_lateral", [](const LateralGrid& g, const ComplexArray& samples) {
        return plane_array(g, spectral::forward_lateral(g, as_vector(samples)));
    });
    m.def("inverse_lateral", [](const LateralGrid& g, const ComplexArray& coeffs) {
        return plane_array(g, spectral::inverse_lateral(g, as_vector(coeffs)));
    });
    m.def("l2_norm_slab", [](const LateralGrid& g, const ComplexArray& f) {
        return spectral::l2_norm_slab(g, as_vector(f));
    });
    m.def("hcurl_norm", [](const LateralGrid& g, const ComplexArray& c1, const ComplexArray& c2,
                           const ComplexArray& c3) {
        return spectral::hcurl_norm(g, field_from_arrays(g, c1, c2, c3));
    });
    m.def(
        "trace_norm",
        [](const LateralGrid& g, const ComplexArray& u1, const ComplexArray& u2,
           const std::string& kind, const std::string& weight) {
            spectral::TangentialTrace t = spectral::TangentialTrace::zero(
                g, spectral::Boundary::Gamma1);
            t.u1 = as_vector(u1);
            t.u2 = as_vector(u2);
            const auto k = kind == "div" ? spectral::TraceNormKind::DivMinusHalf
                                         : spectral::TraceNormKind::CurlMinusHalf;
            const auto w = weight == "as-printed" ? spectral::TraceWeight::AsPrinted
                                                  : spectral::TraceWeight::Standard;
            return spectral::trace_norm(g, t, k, w);
        },
        py::arg("grid"), py::arg("u1"), py::arg("u2"), py::arg("kind") = "curl",
        py::arg("weight") = "standard");

    m.def(
        "beta",
        [](double xi1, double xi2, cdouble s, double eps, double mu, int side) {
            return symbols::beta({xi1, xi2}, ComplexFrequency(s.real(), s.imag()),
                                 symbols::ExteriorMedium(eps, mu, side));
        },
        py::arg("xi1"), py::arg("xi2"), py::arg("s"), py::arg("eps") = 1.0, py::arg("mu") = 1.0,
        py::arg("side") = 1);
    m.def(
        "capacity_matrix",
        [](double xi1, double xi2, cdouble s, double eps, double mu, int side) {
            const auto sym = symbols::capacity_matrix(
                {xi1, xi2}, ComplexFrequency(s.real(), s.imag()),
                symbols::ExteriorMedium(eps, mu, side));
            py::array_t<cdouble> out({2, 2});
            auto r = out.mutable_unchecked<2>();
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) r(i, j) = sym.matrix(i, j);
            return out;
        },
        py::arg("xi1"), py::arg("xi2"), py::arg("s"), py::arg("eps") = 1.0, py::arg("mu") = 1.0,
        py::arg("side") = 1);
    m.def("continuity_constant", [](cdouble s, double eps, double mu) {
        return symbols::continuity_constant(ComplexFrequency(s.real(), s.imag()),
                                            symbols::ExteriorMedium(eps, mu, 1));
    });
    m.def(
        "symbol_audit",
        [](std::uint64_t samples, std::uint64_t seed, double eps, double mu) {
            return symbols::symbol_bound_audit(samples, seed,
                                               symbols::ExteriorMedium(eps, mu, 1))
                .to_json();
        },
        py::arg("samples") = 10000, py::arg("seed") = 20240601, py::arg("eps") = 1.0,
        py::arg("mu") = 1.0);

    m.def(
        "cq_weights",
        [](const std::function<cdouble(cdouble)>& symbol, double dt, int horizon,
           const std::string& generator) {
            const auto gen =
                generator == "BDF1" ? cq::Generator::BDF1 : cq::Generator::BDF2;
            auto w = cq::scalar_weights(symbol, dt, horizon, gen);
            py::array_t<cdouble> out(static_cast<py::ssize_t>(w.size()));
            std::copy(w.begin(), w.end(), out.mutable_data());
            return out;
        },
        py::arg("symbol"), py::arg("dt"), py::arg("horizon"), py::arg("generator") = "BDF2");
    m.def("parseval_residual",
          [](const py::array_t<double>& u, const py::array_t<double>& v, double dt, double s1) {
              cq::TimeSignal su{dt, std::vector<double>(u.data(), u.data() + u.size())};
              cq::TimeSignal sv{dt, std::vector<double>(v.data(), v.data() + v.size())};
              const auto r = cq::parseval_residual(su, sv, s1);
              py::dict d;
              d["residual"] = r.residual;
              d["freq_side"] = r.freq_side;
              d["time_side"] = r.time_side;
              d["truncation"] = r.truncation;
              return d;
          });

    m.def(
        "solve_mode",
        [](double xi1, double xi2, cdouble s, const std::vector<double>& breakpoints,
           const std::vector<double>& eps, const std::vector<double>& mu, int nz,
           py::object source) {
            sdomain::LayeredProfile profile(breakpoints, eps, mu);
            std::unique_ptr<sdomain::ModeSource> src;
            if (!source.is_none()) {
                auto arr = source.cast<ComplexArray>();
                if (arr.ndim() != 2 || arr.shape(0) != 3 || arr.shape(1) != nz)
                    throw ShapeError("solve_mode: source must have shape (3, nz)");
                src = std::make_unique<sdomain::ModeSource>();
                src->f1.assign(arr.data(), arr.data() + nz);
                src->f2.assign(arr.data() + nz, arr.data() + 2 * nz);
                src->f3.assign(arr.data() + 2 * nz, arr.data() + 3 * nz);
            }
            auto sol = sdomain::solve_mode({xi1, xi2}, ComplexFrequency(s.real(), s.imag()),
                                           profile, nz, src.get());
            py::dict d;
            auto dump = [&](const std::vector<cdouble>& v) {
                py::array_t<cdouble> out(static_cast<py::ssize_t>(v.size()));
                std::copy(v.begin(), v.end(), out.mutable_data());
                return out;
            };
            d["e1"] = dump(sol.e1);
            d["e2"] = dump(sol.e2);
            d["e3"] = dump(sol.e3);
            d["residual"] = sol.residual;
            return d;
        },
        py::arg("xi1"), py::arg("xi2"), py::arg("s"), py::arg("breakpoints"), py::arg("eps"),
        py::arg("mu"), py::arg("nz"), py::arg("source") = py::none());

    m.def(
        "run_scenario",
        [](const std::string& config_json, const std::string& out_dir) {
            auto cfg = cli::parse(config_json);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            return cli::execute(cfg);
        },
        py::arg("config_json"), py::arg("out_dir") = std::string());
    m.def(
        "run_check",
        [](const std::string& check_id, std::uint64_t seed, bool quick) {
            verify::SuiteOptions opt;
            opt.seed = seed;
            opt.quick = quick;
            return verify::run_check(check_id, opt).to_json().dump();
        },
        py::arg("check_id"), py::arg("seed") = 20240601, py::arg("quick") = true);
    m.def("suite_check_ids", &verify::suite_check_ids);
}
