/**********
 *   Copyright 2026 The polakit Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
\**********/

#include "polakit/calib.hpp"
#include "polakit/calib_io.hpp"
#include "polakit/filter_lab.hpp"
#include "polakit/image_io.hpp"
#include "polakit/pipeline.hpp"
#include "polakit/synth_cam.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <numbers>

namespace py = pybind11;
using namespace polakit;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <typename T>
py::array_t<T> to_array(const Plane<T>& p) {
    py::array_t<T> out({p.height(), p.width()});
    std::memcpy(out.mutable_data(), p.data().data(), p.size() * sizeof(T));
    return out;
}

py::array_t<double> to_array(const ColorImage& img) {
    py::array_t<double> out({img.height, img.width, std::size_t{3}});
    auto v = out.mutable_unchecked<3>();
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            for (std::size_t c = 0; c < 3; ++c) v(y, x, c) = img.planes[c](x, y);
    return out;
}

py::array_t<std::uint8_t> to_array(const DisplayImage& img) {
    py::array_t<std::uint8_t> out({img.height, img.width, std::size_t{3}});
    std::memcpy(out.mutable_data(), img.rgb.data(), img.rgb.size());
    return out;
}

ColorImage color_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                            double full_scale) {
    if (a.ndim() != 3 || a.shape(2) != 3) fail(ErrorCode::Structural, "expected an HxWx3 array");
    ColorImage img;
    img.height = a.shape(0);
    img.width = a.shape(1);
    img.full_scale = full_scale;
    auto v = a.unchecked<3>();
    for (std::size_t c = 0; c < 3; ++c) {
        img.planes[c] = Plane<double>(img.width, img.height);
        for (std::size_t y = 0; y < img.height; ++y)
            for (std::size_t x = 0; x < img.width; ++x) img.planes[c](x, y) = v(y, x, c);
    }
    return img;
}

RawMosaic mosaic_from_array(const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& a,
                            const std::optional<SensorLayout>& layout, const std::string& provenance) {
    if (a.ndim() != 2) fail(ErrorCode::Structural, "expected a 2-D count array");
    std::vector<std::uint16_t> data(a.data(), a.data() + a.size());
    return RawMosaic(a.shape(1), a.shape(0), layout.value_or(default_layout()), std::move(data),
                     parse_provenance(provenance));
}

py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json py_to_json(const py::object& o) {
    if (py::isinstance<py::str>(o)) return nlohmann::json::parse(o.cast<std::string>());
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "DoFP RGB-polarization toolkit";

    static PyObject* error_type = py::exception<Error>(m, "PolakitError", PyExc_RuntimeError).release().ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error_type)(e.what());
            exc.attr("category") = std::string(e.category());
            PyErr_SetObject(error_type, exc.ptr());
        }
    });

    py::class_<SensorLayout>(m, "SensorLayout")
        .def(py::init([](const std::string& text) { return SensorLayout::parse(text); }), py::arg("text"))
        .def_readonly("bit_depth", &SensorLayout::bit_depth)
        .def_property_readonly("full_scale", &SensorLayout::full_scale)
        .def("__str__", &SensorLayout::to_string)
        .def("__eq__", [](const SensorLayout& a, const SensorLayout& b) { return a == b; });
    m.def("default_layout", &default_layout);

    py::class_<RawMosaic>(m, "RawMosaic")
        .def(py::init(&mosaic_from_array), py::arg("counts"), py::arg("layout") = std::nullopt,
             py::arg("provenance") = "raw")
        .def_property_readonly("width", &RawMosaic::width)
        .def_property_readonly("height", &RawMosaic::height)
        .def_property_readonly("layout", &RawMosaic::layout)
        .def_property_readonly("provenance", [](const RawMosaic& r) { return std::string(name(r.provenance())); })
        .def_property_readonly("counts", [](const RawMosaic& r) {
            return to_array(Plane<std::uint16_t>(r.width(), r.height(), r.data()));
        });

    m.def("read_raw", [](const std::string& path, bool assume_layout) {
        ReadOptions ro;
        ro.assume_layout = assume_layout;
        ro.warn = [](const std::string& msg) {
            py::module_::import("warnings").attr("warn")(msg);
        };
        return read_raw(path, ro).mosaic;
    }, py::arg("path"), py::arg("assume_layout") = false);
    m.def("write_raw", [](const std::string& path, const RawMosaic& mosaic) { write_raw(path, mosaic); },
          py::arg("path"), py::arg("mosaic"));

    m.def("stokes_from_intensities", [](double i0, double i45, double i90, double i135) {
        const StokesPixel s = stokes_from_intensities(i0, i45, i90, i135);
        return py::make_tuple(s.s0, s.s1, s.s2);
    });
    m.def("pixel_pseudo_inverse", [](std::array<double, 4> angles_deg) {
        for (double& a : angles_deg) a *= kDeg;
        const Mat34 pinv = PixelMatrix::from_angles(angles_deg).pseudo_inverse();
        py::array_t<double> out({3, 4});
        auto v = out.mutable_unchecked<2>();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c) v(r, c) = pinv(r, c);
        return out;
    }, py::arg("angles_deg"));
    m.def("polar_params", [](double s0, double s1, double s2, double threshold) {
        const PolarParams p = polar_params({s0, s1, s2}, threshold);
        return py::dict(py::arg("intensity") = p.intensity, py::arg("dolp") = p.dolp, py::arg("aolp") = p.aolp,
                        py::arg("valid") = p.valid, py::arg("overflow") = p.overflow);
    }, py::arg("s0"), py::arg("s1"), py::arg("s2"), py::arg("dolp_threshold") = kDefaultDolpThreshold);

    m.def("compute_stokes", [](const RawMosaic& mosaic) {
        const StokesMap s = compute_stokes_map(mosaic);
        py::dict out;
        for (Color c : kColors) {
            const auto& ch = s.channel(c);
            out[py::str(std::string(name(c)))] =
                py::dict(py::arg("s0") = to_array(ch.s0), py::arg("s1") = to_array(ch.s1), py::arg("s2") = to_array(ch.s2));
        }
        return out;
    }, py::arg("mosaic"));
    m.def("compute_polar_params", [](const RawMosaic& mosaic, double threshold) {
        const PolarParamsMap p = compute_polar_params(compute_stokes_map(mosaic), threshold);
        py::dict out;
        for (Color c : kColors) {
            const auto& ch = p.channel(c);
            out[py::str(std::string(name(c)))] =
                py::dict(py::arg("intensity") = to_array(ch.intensity), py::arg("dolp") = to_array(ch.dolp),
                         py::arg("aolp") = to_array(ch.aolp), py::arg("valid") = to_array(ch.valid),
                         py::arg("overflow") = to_array(ch.overflow));
        }
        return out;
    }, py::arg("mosaic"), py::arg("dolp_threshold") = kDefaultDolpThreshold);

    m.def("modes", [] {
        std::vector<std::string> out;
        for (Mode md : kModes) out.emplace_back(name(md));
        return out;
    });
    m.def("render_mode", [](const RawMosaic& mosaic, const std::string& mode, bool white_balance,
                            std::optional<std::array<double, 3>> gains, double dolp_threshold) {
        ProcessOptions po;
        po.white_balance = white_balance || gains.has_value();
        if (gains) po.gains = WhiteBalanceGains::manual((*gains)[0], (*gains)[1], (*gains)[2]);
        po.dolp_threshold = dolp_threshold;
        py::dict out;
        for (const auto& img : render_mode(mosaic, parse_mode(mode), po)) out[py::str(img.name)] = to_array(img.image);
        return out;
    }, py::arg("mosaic"), py::arg("mode"), py::arg("white_balance") = false, py::arg("gains") = std::nullopt,
       py::arg("dolp_threshold") = kDefaultDolpThreshold);

    m.def("auto_white_balance_gains", [](const RawMosaic& mosaic, int angle_deg, double saturation) {
        ProcessOptions po;
        po.white_balance = true;
        po.wb_angle = angle_from_degrees(angle_deg);
        po.saturation_fraction = saturation;
        return resolve_gains(mosaic, po)->as_array();
    }, py::arg("mosaic"), py::arg("angle_deg") = 0, py::arg("saturation_fraction") = kDefaultSaturationFraction);
    m.def("white_balance_gains", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
                                    double full_scale, double saturation) {
        return auto_white_balance_gains(color_from_array(image, full_scale), saturation).as_array();
    }, py::arg("image"), py::arg("full_scale"), py::arg("saturation_fraction") = kDefaultSaturationFraction);
    m.def("apply_gains", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
                            double full_scale, std::array<double, 3> g) {
        return to_array(apply_gains(color_from_array(image, full_scale), WhiteBalanceGains::manual(g[0], g[1], g[2])));
    }, py::arg("image"), py::arg("full_scale"), py::arg("gains"));

    m.def("simulate_filter", [](const RawMosaic& mosaic, double theta_deg, double q, double r) {
        const FilterResult res = simulate_filter(mosaic, FilterSpec{theta_deg * kDeg, q, r});
        return py::make_tuple(to_array(res.original), to_array(res.filtered));
    }, py::arg("mosaic"), py::arg("theta_deg"), py::arg("q") = 1.0, py::arg("r") = 0.0);
    m.def("remove_specularity", [](const RawMosaic& mosaic) {
        const FilterResult res = remove_specularity(mosaic);
        return py::make_tuple(to_array(res.original), to_array(res.filtered));
    }, py::arg("mosaic"));

    py::class_<CalibrationMaps>(m, "Calibration")
        .def_property_readonly("width", &CalibrationMaps::width)
        .def_property_readonly("height", &CalibrationMaps::height)
        .def_property_readonly("fingerprint", &CalibrationMaps::fingerprint)
        .def_property_readonly("metadata", [](const CalibrationMaps& c) { return json_to_py(to_json(c.metadata())); })
        .def_property_readonly("stats", [](const CalibrationMaps& c) { return json_to_py(to_json(parameter_stats(c))); })
        .def("parameters", [](const CalibrationMaps& c) {
            Plane<double> t(c.width(), c.height()), p(c.width(), c.height()), th(c.width(), c.height()),
                d(c.width(), c.height());
            for (std::size_t i = 0; i < c.pixels().size(); ++i) {
                t.data()[i] = c.pixels()[i].t;
                p.data()[i] = c.pixels()[i].p;
                th.data()[i] = c.pixels()[i].theta;
                d.data()[i] = c.pixels()[i].d;
            }
            return py::dict(py::arg("t") = to_array(t), py::arg("p") = to_array(p), py::arg("theta") = to_array(th),
                            py::arg("d") = to_array(d));
        })
        .def("save", [](const CalibrationMaps& c, const std::string& path) { save_calibration(c, path); });
    m.def("load_calibration", [](const std::string& path) { return load_calibration(path); });
    m.def("fit_calibration", [](const std::vector<RawMosaic>& frames, std::optional<std::vector<double>> angles_deg,
                                double reference_dolp, std::optional<RawMosaic> dark) {
        FlatFieldSet set;
        set.reference_dolp = reference_dolp;
        set.dark = std::move(dark);
        if (angles_deg && angles_deg->size() != frames.size())
            fail(ErrorCode::Argument, "one angle per frame is required");
        for (std::size_t k = 0; k < frames.size(); ++k)
            set.frames.push_back({frames[k], angles_deg ? std::optional<double>((*angles_deg)[k] * kDeg) : std::nullopt});
        py::gil_scoped_release release;
        return fit_calibration(set);
    }, py::arg("frames"), py::arg("angles_deg") = std::nullopt, py::arg("reference_dolp") = 1.0,
       py::arg("dark") = std::nullopt);
    m.def("correct", [](const RawMosaic& mosaic, const CalibrationMaps& maps) { return correct_mosaic(mosaic, maps); },
          py::arg("mosaic"), py::arg("calibration"));
    m.def("calibration_report", [](const CalibrationMaps& maps, const RawMosaic& before, const RawMosaic& after) {
        return json_to_py(to_json(calibration_report(maps, before, after)));
    }, py::arg("calibration"), py::arg("before"), py::arg("after"));

    m.def("render_scene", [](const py::object& scene, const py::object& sensor, std::uint64_t seed,
                             const std::string& base_dir) {
        const SceneSpec sc = scene_from_json(py_to_json(scene));
        const SensorSpec se = sensor_from_json(py_to_json(sensor), base_dir);
        py::gil_scoped_release release;
        return render(sc, se, seed).mosaic;
    }, py::arg("scene"), py::arg("sensor"), py::arg("seed") = 0, py::arg("base_dir") = ".");
    m.def("urban_demo_scene", [](std::size_t w, std::size_t h, double fs) {
        return json_to_py(to_json(urban_demo_scene(w, h, fs)));
    }, py::arg("width"), py::arg("height"), py::arg("full_scale") = 4095.0);
}
