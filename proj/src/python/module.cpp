#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pref/checkpoint.hpp"
#include "pref/cli.hpp"
#include "pref/errors.hpp"
#include "pref/phasor_volume.hpp"
#include "pref/tasks/decode.hpp"
#include "pref/tasks/geometry.hpp"
#include "pref/tasks/image.hpp"
#include "pref/tasks/sdf.hpp"
#include "pref/transform.hpp"
#include "pref/verify/checks.hpp"

namespace py = pybind11;
using namespace pref;

namespace {

py::array_t<std::complex<double>> factor_array(const PhasorVolume& v, int a) {
  const Extents e = v.layout().factor_extents(a);
  std::vector<py::ssize_t> shape{v.channels()};
  for (int d = 0; d < v.dims(); ++d) shape.push_back(e[d]);
  const auto data = v.factor(a);
  py::array_t<std::complex<double>> out(shape);
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

void set_factor(PhasorVolume& v, int a, const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& values) {
  if (a < 0 || a >= v.dims()) throw DimensionError("factor index out of range");
  const auto target = v.mutable_factor(a);
  if (static_cast<std::size_t>(values.size()) != target.size()) throw DimensionError("factor size mismatch");
  std::copy(values.data(), values.data() + values.size(), target.begin());
}

py::array_t<double> image_array(const tasks::Image& image) {
  py::array_t<double> out({image.height, image.width, image.channels});
  std::copy(image.data.begin(), image.data.end(), out.mutable_data());
  return out;
}

tasks::Image image_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw DimensionError("image arrays are [H, W] or [H, W, C]");
  tasks::Image image(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                     a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1);
  std::copy(a.data(), a.data() + a.size(), image.data.begin());
  return image;
}

py::tuple mesh_arrays(const tasks::Mesh& mesh) {
  py::array_t<double> vertices({static_cast<py::ssize_t>(mesh.vertices.size()), py::ssize_t{3}});
  py::array_t<int> faces({static_cast<py::ssize_t>(mesh.faces.size()), py::ssize_t{3}});
  auto v = vertices.mutable_unchecked<2>();
  auto f = faces.mutable_unchecked<2>();
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (int c = 0; c < 3; ++c) v(i, c) = mesh.vertices[i][c];
  }
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    for (int c = 0; c < 3; ++c) f(i, c) = mesh.faces[i][c];
  }
  return py::make_tuple(vertices, faces);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phasorial embedding fields";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<LayoutError>(m, "LayoutError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  py::class_<FrequencyLayout>(m, "FrequencyLayout")
      .def(py::init<int, std::vector<int>, int>(), py::arg("dims"), py::arg("resolution"), py::arg("reduced"))
      .def_static("uniform", &FrequencyLayout::uniform, py::arg("dims"), py::arg("resolution"), py::arg("reduced"))
      .def_property_readonly("dims", &FrequencyLayout::dims)
      .def_property_readonly("resolutions", &FrequencyLayout::resolutions)
      .def_property_readonly("reduced_size", &FrequencyLayout::reduced_size)
      .def_property_readonly("reduced_freqs", &FrequencyLayout::reduced_freqs)
      .def("full_freqs", &FrequencyLayout::full_freqs, py::arg("axis"))
      .def("__eq__", [](const FrequencyLayout& a, const FrequencyLayout& b) { return a == b; });

  py::class_<PhasorVolume>(m, "PhasorVolume")
      .def(py::init([](const FrequencyLayout& layout, int channels, const std::string& init, double std,
                       std::uint64_t seed) {
             if (init == "zero") return new_volume(layout, channels, ZeroInit{});
             if (init == "random") return new_volume(layout, channels, RandomInit{std, seed});
             throw UsageError("init must be 'zero' or 'random'");
           }),
           py::arg("layout"), py::arg("channels"), py::arg("init") = "zero", py::arg("std") = 0.1,
           py::arg("seed") = 0)
      .def_property_readonly("layout", &PhasorVolume::layout)
      .def_property_readonly("dims", &PhasorVolume::dims)
      .def_property_readonly("channels", &PhasorVolume::channels)
      .def_property_readonly("parameter_count", &PhasorVolume::parameter_count)
      .def("factor", &factor_array, py::arg("index"), "Copy of factor `index`, shape [k, E0, E1(, E2)]")
      .def("set_factor", &set_factor, py::arg("index"), py::arg("values"))
      .def("__eq__", [](const PhasorVolume& a, const PhasorVolume& b) { return a == b; });

  m.def("eval_exact", &eval_exact, py::arg("volume"), py::arg("coords"));
  m.def("eval_fast", &eval_fast, py::arg("volume"), py::arg("coords"), py::arg("threads") = 1);
  m.def(
      "eval_derivative",
      [](const PhasorVolume& v, const Matrix& coords, int axis, int order, bool exact) {
        return eval_derivative(v, coords, axis, order, exact ? Evaluation::Exact : Evaluation::Fast);
      },
      py::arg("volume"), py::arg("coords"), py::arg("axis"), py::arg("order") = 1, py::arg("exact") = false);
  m.def("gaussian_filter", &gaussian_filter, py::arg("volume"), py::arg("sigma"));
  m.def("high_band_energy", &high_band_energy, py::arg("volume"), py::arg("cutoff"));
  m.def("spectral_energy", &spectral_energy, py::arg("volume"));
  m.def("spatial_energy", &spatial_energy, py::arg("volume"), py::arg("grid_res"));

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_property_readonly("is_phasor",
                             [](const Checkpoint& c) { return std::holds_alternative<PhasorVolume>(c.encoder); })
      .def_property_readonly("volume",
                             [](const Checkpoint& c) {
                               if (!std::holds_alternative<PhasorVolume>(c.encoder)) {
                                 throw UsageError("checkpoint holds a dense grid");
                               }
                               return std::get<PhasorVolume>(c.encoder);
                             })
      .def_property_readonly("step", [](const Checkpoint& c) { return c.metadata.step; })
      .def_property_readonly("loss_tail", [](const Checkpoint& c) { return c.metadata.loss_tail; })
      .def_property_readonly("output_width", [](const Checkpoint& c) { return c.mlp.output_width(); })
      .def("decode", [](const Checkpoint& c, const Matrix& coords, int threads) { return tasks::decode(c, coords, threads); },
           py::arg("coords"), py::arg("threads") = 1, "MLP(encoder(coords)) at unit-domain coordinates")
      .def("to_bytes",
           [](const Checkpoint& c) {
             const auto bytes = serialize(c);
             return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
           })
      .def_static("from_bytes", [](const py::bytes& b) {
        const std::string s = b;
        return deserialize(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      });

  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("checkpoint"));

  m.def("read_image", [](const std::filesystem::path& p) { return image_array(tasks::read_image(p)); }, py::arg("path"));
  m.def(
      "write_image", [](const std::filesystem::path& p, const py::array_t<double>& a) { tasks::write_image(p, image_from_array(a)); },
      py::arg("path"), py::arg("image"));
  m.def(
      "render", [](const Checkpoint& c, int h, int w, int threads) { return image_array(tasks::render(c, h, w, threads)); },
      py::arg("checkpoint"), py::arg("height"), py::arg("width"), py::arg("threads") = 1);
  m.def(
      "psnr", [](const Matrix& a, const Matrix& b) { return tasks::psnr(a, b); }, py::arg("predicted"), py::arg("target"));

  m.def(
      "extract_mesh",
      [](const Checkpoint& c, int res, int threads) {
        return mesh_arrays(tasks::marching_cubes(tasks::checkpoint_sampler(c, threads), res));
      },
      py::arg("checkpoint"), py::arg("res") = 128, py::arg("threads") = 1,
      "Marching cubes of an SDF checkpoint over [-1, 1]^3; returns (vertices, faces)");
  m.def(
      "marching_cubes",
      [](const std::function<Vector(const Matrix&)>& field, int res) {
        return mesh_arrays(tasks::marching_cubes(field, res));
      },
      py::arg("field"), py::arg("res"), "Marching cubes of a callable mapping [B, 3] points to [B] values");
  m.def(
      "sphere_iou",
      [](const Checkpoint& c, double radius, int res, int threads) {
        const tasks::SphereShape sphere(radius);
        return tasks::iou(tasks::checkpoint_sampler(c, threads), tasks::shape_sampler(sphere), res);
      },
      py::arg("checkpoint"), py::arg("radius"), py::arg("res") = 64, py::arg("threads") = 1);

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& r : verify::run_selftest(seed)) out.append(py::make_tuple(r.name, r.passed, r.detail));
        return out;
      },
      py::arg("seed") = 7, "Runs the oracle checks; returns (name, passed, detail) tuples");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a command line; returns (exit_code, stdout, stderr)");
}
