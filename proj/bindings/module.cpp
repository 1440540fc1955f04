#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <utility>

#include "aumap/accuracy.hpp"
#include "aumap/dataio.hpp"
#include "aumap/error.hpp"
#include "aumap/projector.hpp"
#include "aumap/stream.hpp"

namespace py = pybind11;
using namespace aumap;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& arr, const char* what) {
    if (arr.ndim() != 2) raise(ErrorCode::dimension_mismatch, std::string(what) + " must be 2-D");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    if (m.rows() * m.cols())
        std::memcpy(m.data().data(), arr.data(), sizeof(double) * m.rows() * m.cols());
    return m;
}

py::array_t<double> from_matrix(const Matrix& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    if (m.rows() * m.cols())
        std::memcpy(arr.mutable_data(), m.data().data(), sizeof(double) * m.rows() * m.cols());
    return arr;
}

std::vector<double> to_vector(const DoubleArray& arr, const char* what) {
    if (arr.ndim() != 1) raise(ErrorCode::dimension_mismatch, std::string(what) + " must be 1-D");
    const auto n = static_cast<std::size_t>(arr.shape(0));
    std::vector<double> v(n);
    if (n) std::memcpy(v.data(), arr.data(), sizeof(double) * n);
    return v;
}

Projector fit_projector(const DoubleArray& inputs, const DoubleArray& projections, std::size_t k,
                        double zero_distance_epsilon, const std::string& strategy) {
    ReferenceEmbedding embedding;
    embedding.inputs = to_matrix(inputs, "inputs");
    embedding.projections = to_matrix(projections, "projections");
    ProjectorConfig config;
    config.k = k;
    config.zero_distance_epsilon = zero_distance_epsilon;
    return Projector::fit(std::move(embedding), config, parse_strategy(strategy));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Real-time out-of-sample projection onto a frozen embedding";

    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    py::class_<Projector>(m, "Projector",
                          "Nearest-neighbor projection onto a reference embedding")
        .def_static("fit", &fit_projector, py::arg("inputs"), py::arg("projections"),
                    py::arg("k") = 15, py::arg("zero_distance_epsilon") = 1e-12,
                    py::arg("strategy") = "kd_tree",
                    "Index the reference inputs and freeze their projections")
        .def(
            "project_point",
            [](const Projector& p, const DoubleArray& x) {
                const Projection u = p.project_point(to_vector(x, "x"));
                py::array_t<double> out(u.size());
                std::memcpy(out.mutable_data(), u.data(), sizeof(double) * u.size());
                return out;
            },
            py::arg("x"), "Project one point; returns a 1-D array")
        .def(
            "project_batch",
            [](const Projector& p, const DoubleArray& xs) {
                return from_matrix(p.project_batch(to_matrix(xs, "points")));
            },
            py::arg("points"), "Project a batch; row i is the projection of input row i")
        .def_property_readonly("k", [](const Projector& p) { return p.config().k; })
        .def_property_readonly("size", [](const Projector& p) { return p.embedding().size(); })
        .def_property_readonly("input_dim",
                               [](const Projector& p) { return p.embedding().input_dim(); })
        .def_property_readonly("output_dim",
                               [](const Projector& p) { return p.embedding().output_dim(); });

    m.def(
        "generate_poisson",
        [](std::size_t class_count, std::size_t dim, std::size_t samples_per_class,
           double rate_low, double rate_high, std::uint64_t seed) {
            PoissonSpec spec;
            spec.class_count = class_count;
            spec.dim = dim;
            spec.samples_per_class = samples_per_class;
            spec.rate_low = rate_low;
            spec.rate_high = rate_high;
            spec.seed = seed;
            const LabeledDataset ds = generate_poisson(spec);
            py::array_t<int> labels(ds.labels.size());
            std::memcpy(labels.mutable_data(), ds.labels.data(),
                        sizeof(int) * ds.labels.size());
            return py::make_tuple(from_matrix(ds.samples), labels);
        },
        py::arg("class_count") = 5, py::arg("dim") = 1000, py::arg("samples_per_class") = 1000,
        py::arg("rate_low") = 1.0, py::arg("rate_high") = 10.0, py::arg("seed") = 0,
        "Seeded multiclass Poisson mock data; returns (samples, labels)");

    m.def(
        "normalized_mean_distance",
        [](const DoubleArray& approx, const DoubleArray& oracle) {
            const AccuracyReport r = normalized_mean_distance(to_matrix(approx, "approx"),
                                                              to_matrix(oracle, "oracle"));
            py::dict d;
            d["mean_distance"] = r.mean_distance;
            d["variance"] = r.variance;
            d["n_points"] = r.n_points;
            d["sigma"] = r.sigma;
            return d;
        },
        py::arg("approx"), py::arg("oracle"),
        "Mean distance between the two clouds in units of the oracle spread");

    m.def(
        "handle_request",
        [](const Projector& p, const std::string& line) { return handle_request(p, line); },
        py::arg("projector"), py::arg("line"),
        "Answer one newline-delimited JSON request line; never raises");
}
