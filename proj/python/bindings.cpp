#include "hogs/convergence.hpp"
#include "hogs/eval.hpp"
#include "hogs/fixtures.hpp"
#include "hogs/io.hpp"
#include "hogs/metrics.hpp"
#include "hogs/parallel.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hogs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const Image& img) {
  std::vector<py::ssize_t> shape = {img.height, img.width};
  if (img.channels > 1) shape.push_back(img.channels);
  py::array_t<double> out(shape);
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

Image from_numpy(const Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw std::invalid_argument("expected an H x W (x C) array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
            a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1);
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

py::array_t<double> column(const std::vector<double>& v, size_t n, int stride) {
  py::array_t<double> out = stride == 1 ? py::array_t<double>({static_cast<py::ssize_t>(n)})
                                        : py::array_t<double>({static_cast<py::ssize_t>(n),
                                                               static_cast<py::ssize_t>(stride)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<Vec3> rows3(const Array& a, const char* what) {
  if (a.ndim() != 2 || a.shape(1) != 3) {
    throw std::invalid_argument(std::string(what) + " must have shape (N, 3)");
  }
  std::vector<Vec3> out(static_cast<size_t>(a.shape(0)));
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = Vec3(a.at(i, 0), a.at(i, 1), a.at(i, 2));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CPU Gaussian splatting with homogeneous coordinates";

  py::enum_<Parametrization>(m, "Parametrization")
      .value("Cartesian", Parametrization::Cartesian)
      .value("Homogeneous", Parametrization::Homogeneous)
      .value("InvertedSpherical", Parametrization::InvertedSpherical);
  m.def("parse_parametrization",
        [](const std::string& s) { return parse_parametrization(s); });

  py::class_<RawGeometry>(m, "RawGeometry")
      .def(py::init<>())
      .def_readwrite("position", &RawGeometry::position)
      .def_readwrite("log_scale", &RawGeometry::log_scale)
      .def_readwrite("rotation", &RawGeometry::rotation)
      .def_readwrite("weight", &RawGeometry::weight);

  py::class_<DecodedGeometry>(m, "DecodedGeometry")
      .def_readonly("mean", &DecodedGeometry::mean)
      .def_readonly("scale", &DecodedGeometry::scale)
      .def_readonly("rotation", &DecodedGeometry::rotation)
      .def_readonly("covariance", &DecodedGeometry::covariance)
      .def_readonly("valid", &DecodedGeometry::valid);

  m.def("encode_from_cartesian", &encode_from_cartesian, py::arg("mean"), py::arg("scale"),
        py::arg("rotation"), py::arg("parametrization"), py::arg("w_hint") = py::none());
  m.def("decode", &decode, py::arg("raw"), py::arg("parametrization"));
  m.def("rescale_homogeneous", &rescale_homogeneous, py::arg("raw"), py::arg("k"));

  py::class_<Camera>(m, "Camera")
      .def(py::init<>())
      .def_readwrite("fx", &Camera::fx)
      .def_readwrite("fy", &Camera::fy)
      .def_readwrite("cx", &Camera::cx)
      .def_readwrite("cy", &Camera::cy)
      .def_readwrite("width", &Camera::width)
      .def_readwrite("height", &Camera::height)
      .def_readwrite("rotation", &Camera::rotation)
      .def_readwrite("translation", &Camera::translation)
      .def("center", &Camera::center)
      .def_static("look_at", &Camera::look_at, py::arg("eye"), py::arg("target"), py::arg("up"),
                  py::arg("focal"), py::arg("width"), py::arg("height"));

  py::class_<GaussianSet>(m, "GaussianSet")
      .def(py::init<Parametrization, int>(), py::arg("parametrization"),
           py::arg("max_sh_degree") = 3)
      .def("__len__", &GaussianSet::size)
      .def_readonly("parametrization", &GaussianSet::parametrization)
      .def_readonly("max_sh_degree", &GaussianSet::max_sh_degree)
      .def_readwrite("active_sh_degree", &GaussianSet::active_sh_degree)
      .def("geometry", &GaussianSet::geometry)
      .def("set_geometry", &GaussianSet::set_geometry)
      .def("decoded", &GaussianSet::decoded)
      .def("opacity", &GaussianSet::opacity)
      .def("push_back",
           [](GaussianSet& s, const RawGeometry& g, double opacity_logit,
              const std::vector<double>& sh) { s.push_back(g, opacity_logit, sh); },
           py::arg("geometry"), py::arg("opacity_logit"), py::arg("sh"))
      .def("means",
           [](const GaussianSet& s) {
             py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{3}});
             auto r = out.mutable_unchecked<2>();
             for (size_t i = 0; i < s.size(); ++i) {
               const Vec3 p = s.decoded(i).mean;
               for (int k = 0; k < 3; ++k) r(i, k) = p[k];
             }
             return out;
           })
      .def_property_readonly("weights",
                             [](const GaussianSet& s) {
                               return column(s.params.weight, s.size(), 1);
                             })
      .def_property_readonly("opacity_logits", [](const GaussianSet& s) {
        return column(s.params.opacity, s.size(), 1);
      });

  m.def(
      "init_from_points",
      [](const Array& positions, const Array& colors, Parametrization p, const std::string& w_init,
         int max_sh_degree, uint64_t seed) {
        PointCloud cloud;
        cloud.positions = rows3(positions, "positions");
        cloud.colors = rows3(colors, "colors");
        InitConfig cfg;
        cfg.max_sh_degree = max_sh_degree;
        cfg.seed = seed;
        parse_weight_init(w_init, cfg);
        return init_from_points(cloud, p, cfg);
      },
      py::arg("positions"), py::arg("colors"), py::arg("parametrization"),
      py::arg("w_init") = "1/d", py::arg("max_sh_degree") = 3, py::arg("seed") = 0);

  m.def(
      "render",
      [](const GaussianSet& set, const Camera& cam, const Vec3& background, double near_clip) {
        RenderConfig rc;
        rc.background = background;
        rc.near_clip = near_clip;
        RenderOutput r;
        {
          py::gil_scoped_release release;
          r = render(set, cam, rc);
        }
        py::dict out;
        out["radiance"] = to_numpy(r.radiance);
        out["alpha"] = to_numpy(r.alpha);
        out["depth"] = to_numpy(r.depth_expected);
        return out;
      },
      py::arg("set"), py::arg("camera"), py::arg("background") = Vec3::Zero(),
      py::arg("near_clip") = 0.01);

  m.def("psnr", [](const Array& a, const Array& b) { return psnr(from_numpy(a), from_numpy(b)); });
  m.def("ssim", [](const Array& a, const Array& b) { return ssim(from_numpy(a), from_numpy(b)); });

  m.def(
      "split_train_test",
      [](size_t n, size_t every) {
        const TrainTestSplit s = split_train_test(n, every);
        return py::make_tuple(s.train, s.test);
      },
      py::arg("view_count"), py::arg("every") = 8);

  m.def(
      "simulate_1d",
      [](double lr, const std::vector<double>& targets, const std::string& rep, int max_iters) {
        Sim1DConfig cfg;
        cfg.lr = lr;
        cfg.targets = targets;
        cfg.max_iters = max_iters;
        const Sim1DRep r = rep == "cartesian" ? Sim1DRep::Cartesian : Sim1DRep::Homogeneous;
        if (rep != "cartesian" && rep != "homogeneous") {
          throw std::invalid_argument("representation must be 'cartesian' or 'homogeneous'");
        }
        py::list out;
        for (const auto& t : simulate_1d(cfg, r)) {
          if (t.iterations_to_tol) out.append(*t.iterations_to_tol);
          else out.append(py::none());
        }
        return out;
      },
      py::arg("lr") = 0.1, py::arg("targets") = std::vector<double>{10.0, 50.0, 250.0},
      py::arg("representation") = "homogeneous", py::arg("max_iters") = 10000);

  m.def(
      "load_checkpoint", [](const std::string& path) { return load_checkpoint(path).state.set; },
      py::arg("path"));
  m.def("export_3dgs_ply", &export_3dgs_ply, py::arg("set"), py::arg("path"));
  m.def(
      "write_fixture",
      [](const std::string& dir, uint64_t seed, bool small) {
        SyntheticSceneSpec spec = small ? SyntheticSceneSpec::small(seed) : SyntheticSceneSpec{};
        spec.seed = seed;
        return write_scene(generate_scene(spec), dir);
      },
      py::arg("dir"), py::arg("seed") = 7, py::arg("small") = true);

  m.def("set_thread_count", &set_thread_count);
  m.def("thread_count", &thread_count);

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
}
