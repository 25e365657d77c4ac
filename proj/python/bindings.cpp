#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "nearfar/commands.hpp"
#include "nearfar/config.hpp"
#include "nearfar/dataio.hpp"
#include "nearfar/eval.hpp"

namespace py = pybind11;
using namespace nearfar;

namespace {

nlohmann::ordered_json dict_to_json(const py::dict& d) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [key, value] : d) {
        const auto name = key.cast<std::string>();
        if (py::isinstance<py::bool_>(value)) {
            j[name] = value.cast<bool>();
        } else if (py::isinstance<py::int_>(value)) {
            j[name] = value.cast<std::int64_t>();
        } else if (py::isinstance<py::float_>(value)) {
            j[name] = value.cast<double>();
        } else if (py::isinstance<py::str>(value)) {
            j[name] = value.cast<std::string>();
        } else if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& item : value.cast<py::sequence>()) {
                arr.push_back(item.cast<double>());
            }
            j[name] = arr;
        } else {
            throw py::type_error("unsupported config value for key \"" + name + "\"");
        }
    }
    return j;
}

std::string box_repr(const CornerBox& b) {
    std::ostringstream ss;
    ss << "CornerBox(" << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2 << ")";
    return ss.str();
}

std::string state_repr(const StateBox& s) {
    std::ostringstream ss;
    ss << "StateBox(x=" << s.x << ", y=" << s.y << ", s=" << s.s << ", r=" << s.r << ")";
    return ss.str();
}

}  // namespace

PYBIND11_MODULE(_nearfar, m) {
    m.doc() = "near-to-far track-back labeling and loss-weighted sampling";

    // ---- geometry ----
    py::class_<CornerBox>(m, "CornerBox")
        .def(py::init<>())
        .def(py::init<double, double, double, double>(), py::arg("x1"), py::arg("y1"),
             py::arg("x2"), py::arg("y2"))
        .def_readwrite("x1", &CornerBox::x1)
        .def_readwrite("y1", &CornerBox::y1)
        .def_readwrite("x2", &CornerBox::x2)
        .def_readwrite("y2", &CornerBox::y2)
        .def("width", &CornerBox::width)
        .def("height", &CornerBox::height)
        .def("area", &CornerBox::area)
        .def("valid", &CornerBox::valid)
        .def("__eq__", [](const CornerBox& a, const CornerBox& b) { return a == b; })
        .def("__repr__", &box_repr);

    py::class_<StateBox>(m, "StateBox")
        .def(py::init<>())
        .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("s"),
             py::arg("r"))
        .def_readwrite("x", &StateBox::x)
        .def_readwrite("y", &StateBox::y)
        .def_readwrite("s", &StateBox::s)
        .def_readwrite("r", &StateBox::r)
        .def("valid", &StateBox::valid)
        .def("__eq__", [](const StateBox& a, const StateBox& b) { return a == b; })
        .def("__repr__", &state_repr);

    m.def("corner_to_state", &corner_to_state, py::arg("box"));
    m.def("state_to_corner", &state_to_corner, py::arg("state"));
    m.def("iou", &iou, py::arg("a"), py::arg("b"));

    // ---- kalman ----
    py::class_<KalmanConfig>(m, "KalmanConfig")
        .def(py::init<>())
        .def_readwrite("p0_diag", &KalmanConfig::p0_diag)
        .def_readwrite("q_diag", &KalmanConfig::q_diag)
        .def_readwrite("r_diag", &KalmanConfig::r_diag)
        .def_readwrite("s_min", &KalmanConfig::s_min);

    py::class_<KalmanState>(m, "KalmanState")
        .def_property(
            "mean", [](const KalmanState& k) { return Eigen::Matrix<double, 7, 1>(k.mean); },
            [](KalmanState& k, const Eigen::Matrix<double, 7, 1>& v) { k.mean = v; })
        .def_property(
            "cov", [](const KalmanState& k) { return Eigen::Matrix<double, 7, 7>(k.cov); },
            [](KalmanState& k, const Eigen::Matrix<double, 7, 7>& v) { k.cov = v; });

    py::class_<KalmanPrediction>(m, "KalmanPrediction")
        .def_readonly("state", &KalmanPrediction::state)
        .def_readonly("box", &KalmanPrediction::box);

    m.def("kalman_init", &init_state, py::arg("z"), py::arg("config") = KalmanConfig{});
    m.def("kalman_predict", &predict, py::arg("state"), py::arg("config") = KalmanConfig{});
    m.def("kalman_update", &update, py::arg("state"), py::arg("z"),
          py::arg("config") = KalmanConfig{});
    m.def("measurement_of", &measurement_of, py::arg("state"));

    // ---- association ----
    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("matched", &MatchResult::matched)
        .def_readonly("unmatched_detections", &MatchResult::unmatched_detections)
        .def_readonly("unmatched_trackers", &MatchResult::unmatched_trackers);

    m.def("solve_assignment", &solve_assignment, py::arg("scores"));
    m.def("match_detections", &match_detections, py::arg("detections"), py::arg("predictions"),
          py::arg("iou_min") = 0.3);

    // ---- detections and labels ----
    py::enum_<Source>(m, "Source")
        .value("GroundTruth", Source::GroundTruth)
        .value("Detector", Source::Detector)
        .value("Corrected", Source::Corrected);

    py::class_<Detection>(m, "Detection")
        .def(py::init<>())
        .def_readwrite("frame_id", &Detection::frame_id)
        .def_readwrite("box", &Detection::box)
        .def_readwrite("class_id", &Detection::class_id)
        .def_readwrite("score", &Detection::score)
        .def_readwrite("loss", &Detection::loss)
        .def_readwrite("source", &Detection::source);

    py::class_<LabelRecord>(m, "LabelRecord")
        .def(py::init<>())
        .def_readwrite("seq", &LabelRecord::seq)
        .def_readwrite("det", &LabelRecord::det)
        .def_readwrite("track_id", &LabelRecord::track_id)
        .def_readwrite("saved", &LabelRecord::saved);

    // ---- synthetic scenes ----
    py::class_<GtEntry>(m, "GtEntry")
        .def(py::init<>())
        .def(py::init([](int object_id, int class_id, const CornerBox& box) {
                 return GtEntry{object_id, class_id, box};
             }),
             py::arg("object_id"), py::arg("class_id"), py::arg("box"))
        .def_readwrite("object_id", &GtEntry::object_id)
        .def_readwrite("class_id", &GtEntry::class_id)
        .def_readwrite("box", &GtEntry::box);

    py::class_<SceneObject>(m, "SceneObject")
        .def(py::init<>())
        .def_readwrite("id", &SceneObject::id)
        .def_readwrite("class_id", &SceneObject::class_id)
        .def_readwrite("size", &SceneObject::size)
        .def_readwrite("z0", &SceneObject::z0)
        .def_readwrite("speed", &SceneObject::speed)
        .def_readwrite("lateral_offset", &SceneObject::lateral_offset)
        .def_readwrite("lateral_drift", &SceneObject::lateral_drift)
        .def_readwrite("focal", &SceneObject::focal);

    py::class_<SceneSpec>(m, "SceneSpec")
        .def(py::init<>())
        .def_readwrite("width", &SceneSpec::width)
        .def_readwrite("height", &SceneSpec::height)
        .def_readwrite("frame_count", &SceneSpec::frame_count)
        .def_readwrite("objects", &SceneSpec::objects)
        .def_readwrite("seed", &SceneSpec::seed)
        .def_readwrite("min_visible_area", &SceneSpec::min_visible_area)
        .def_readwrite("z_min", &SceneSpec::z_min);

    m.def("default_scene_spec", &default_scene_spec, py::arg("width") = 1280.0,
          py::arg("height") = 384.0, py::arg("frame_count") = 101, py::arg("object_count") = 8,
          py::arg("seed") = 42);
    m.def("generate_scene", &generate_scene, py::arg("spec"));
    m.def("sparsify", &sparsify, py::arg("gt"), py::arg("keyframe_interval"));

    // ---- configuration and the labeling pass ----
    py::class_<PipelineConfig>(m, "PipelineConfig").def(py::init<>());
    m.def(
        "make_config", [](const py::dict& d) { return config_from_json(dict_to_json(d)); },
        py::arg("options"), "Pipeline config from a dict of dotted keys.");

    m.def("label_sequence", &run_label_sequence, py::arg("seq"), py::arg("gt"), py::arg("config"),
          "Track-back labeling of one sequence from its (full) ground truth.");

    // ---- sampling ----
    m.def(
        "normalized_weights",
        [](const std::vector<double>& losses) { return normalized_weights(losses); },
        py::arg("losses"));
    m.def(
        "standardize", [](const std::vector<double>& losses) { return standardize(losses); },
        py::arg("losses"));
    m.def(
        "clipped_probabilities",
        [](const std::vector<double>& weights, std::int64_t m_target) {
            return clipped_probabilities(weights, m_target);
        },
        py::arg("weights"), py::arg("m"));
    m.def(
        "relative_variance",
        [](const std::vector<double>& weights, std::int64_t m_target) {
            return relative_variance(weights, m_target);
        },
        py::arg("weights"), py::arg("m"));

    py::class_<EfficiencyPoint>(m, "EfficiencyPoint")
        .def_readonly("fraction", &EfficiencyPoint::fraction)
        .def_readonly("m", &EfficiencyPoint::m)
        .def_readonly("r", &EfficiencyPoint::r);
    m.def(
        "efficiency_curve",
        [](const std::vector<double>& losses, const std::vector<double>& fractions) {
            return efficiency_curve(losses, fractions);
        },
        py::arg("losses"), py::arg("fractions"));

    m.def(
        "draw_sample_bernoulli",
        [](const std::vector<double>& probabilities, std::uint64_t seed) {
            return draw_sample_bernoulli(probabilities, seed);
        },
        py::arg("probabilities"), py::arg("seed"));
    m.def(
        "draw_sample_multinomial",
        [](const std::vector<double>& weights, std::int64_t m_target, std::uint64_t seed) {
            return draw_sample_multinomial(weights, m_target, seed);
        },
        py::arg("weights"), py::arg("m"), py::arg("seed"));

    py::class_<McEstimate>(m, "McEstimate")
        .def_readonly("mean", &McEstimate::mean)
        .def_readonly("variance", &McEstimate::variance)
        .def_readonly("trial_values", &McEstimate::trial_values);
    m.def(
        "estimator_variance_mc",
        [](const std::vector<double>& f, const std::vector<double>& q, std::int64_t trials,
           std::int64_t draws, std::uint64_t seed) {
            return estimator_variance_mc(f, q, trials, draws, seed);
        },
        py::arg("f"), py::arg("q"), py::arg("trials"), py::arg("draws_per_trial"), py::arg("seed"));

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("slope", &FitResult::slope)
        .def_readonly("intercept", &FitResult::intercept)
        .def_readonly("r", &FitResult::r)
        .def_readonly("n", &FitResult::n);
    m.def(
        "paired_series_fit",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
            return paired_series_fit(xs, ys);
        },
        py::arg("xs"), py::arg("ys"));

    // ---- evaluation ----
    py::class_<ClassEval>(m, "ClassEval")
        .def_readonly("class_id", &ClassEval::class_id)
        .def_readonly("ap", &ClassEval::ap)
        .def_readonly("tp", &ClassEval::tp)
        .def_readonly("fp", &ClassEval::fp)
        .def_readonly("fn", &ClassEval::fn)
        .def_readonly("gt_count", &ClassEval::gt_count);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("per_class", &EvalReport::per_class)
        .def_readonly("map", &EvalReport::map)
        .def_readonly("tp", &EvalReport::tp)
        .def_readonly("fp", &EvalReport::fp)
        .def_readonly("fn", &EvalReport::fn);

    m.def("eval_ap", &eval_ap, py::arg("predictions"), py::arg("ground_truth"),
          py::arg("iou_threshold") = 0.5);

    m.def("gt_to_records", &gt_to_records, py::arg("seq"), py::arg("gt"));
    m.def("read_labels", &read_labels, py::arg("path"));
    m.def("write_labels", &write_labels, py::arg("path"), py::arg("records"));

    // ---- dataset utilities ----
    py::class_<KittiReadResult>(m, "KittiReadResult")
        .def_readonly("gt", &KittiReadResult::gt)
        .def_readonly("dropped", &KittiReadResult::dropped);
    m.def("default_class_map", &default_class_map);
    m.def(
        "read_kitti_labels",
        [](const std::filesystem::path& dir) {
            return read_kitti_labels(dir, default_class_map());
        },
        py::arg("dir"));
    m.def(
        "write_kitti_labels",
        [](const std::filesystem::path& dir, const std::vector<LabelRecord>& records) {
            write_kitti_labels(dir, records, class_names(default_class_map()));
        },
        py::arg("dir"), py::arg("records"));

    py::class_<FrameSplit>(m, "FrameSplit")
        .def_readonly("train", &FrameSplit::train)
        .def_readonly("val", &FrameSplit::val)
        .def_readonly("test", &FrameSplit::test);
    m.def("split_frames", &split_frames, py::arg("frames"), py::arg("n_train"), py::arg("n_val"),
          py::arg("n_test"), py::arg("seed"));
}
