#include "nearfar/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "nearfar/errors.hpp"

namespace nearfar {

using nlohmann::ordered_json;

namespace {

double get_number(const ordered_json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("config key \"" + key + "\" must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("config key \"" + key + "\" must be finite");
    return x;
}

std::int64_t get_int(const ordered_json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError("config key \"" + key + "\" must be an integer");
    return v.get<std::int64_t>();
}

bool get_bool(const ordered_json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError("config key \"" + key + "\" must be a boolean");
    return v.get<bool>();
}

std::string get_string(const ordered_json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("config key \"" + key + "\" must be a string");
    return v.get<std::string>();
}

template <std::size_t N>
std::array<double, N> get_diag(const ordered_json& v, const std::string& key) {
    if (!v.is_array() || v.size() != N) {
        throw ConfigError("config key \"" + key + "\" must be an array of " + std::to_string(N) +
                          " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = get_number(v[i], key);
        if (out[i] < 0.0) throw ConfigError("config key \"" + key + "\" must be nonnegative");
    }
    return out;
}

void check_range(bool ok, const std::string& key, const char* what) {
    if (!ok) throw ConfigError("config key \"" + key + "\": " + what);
}

}  // namespace

LabelerParams PipelineConfig::labeler_params() const {
    LabelerParams params;
    params.kalman = kalman;
    params.iou_min = assoc_iou_min;
    params.max_misses = labeler_max_misses;
    params.loss_threshold = labeler_loss_threshold;
    params.allow_unseeded_tracks = labeler_allow_unseeded_tracks;
    params.correct_classes = labeler_correct_classes;
    return params;
}

PipelineConfig config_from_json(const ordered_json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object of dotted keys");
    PipelineConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "kalman.p0_diag") {
            cfg.kalman.p0_diag = get_diag<7>(value, key);
        } else if (key == "kalman.q_diag") {
            cfg.kalman.q_diag = get_diag<7>(value, key);
        } else if (key == "kalman.r_diag") {
            cfg.kalman.r_diag = get_diag<4>(value, key);
            for (double r : cfg.kalman.r_diag) {
                check_range(r > 0.0, key, "measurement noise must be positive");
            }
        } else if (key == "kalman.s_min") {
            cfg.kalman.s_min = get_number(value, key);
            check_range(cfg.kalman.s_min > 0.0, key, "must be positive");
        } else if (key == "assoc.iou_min") {
            cfg.assoc_iou_min = get_number(value, key);
            check_range(cfg.assoc_iou_min >= 0.0 && cfg.assoc_iou_min <= 1.0, key,
                        "must lie in [0, 1]");
        } else if (key == "detect.kind") {
            cfg.detect_kind = get_string(value, key);
            check_range(cfg.detect_kind == "synthetic" || cfg.detect_kind == "file", key,
                        "must be \"synthetic\" or \"file\"");
        } else if (key == "detect.hit_min") {
            cfg.detect_noise.hit_min = get_number(value, key);
            check_range(cfg.detect_noise.hit_min >= 0.0 && cfg.detect_noise.hit_min <= 1.0, key,
                        "must lie in [0, 1]");
        } else if (key == "detect.sigma_reg") {
            cfg.detect_noise.sigma_reg = get_number(value, key);
            check_range(cfg.detect_noise.sigma_reg >= 0.0, key, "must be >= 0");
        } else if (key == "detect.beta") {
            cfg.detect_noise.beta = get_number(value, key);
            check_range(cfg.detect_noise.beta >= 0.0 && cfg.detect_noise.beta <= 1.0, key,
                        "must lie in [0, 1]");
        } else if (key == "detect.a0") {
            cfg.detect_noise.a0 = get_number(value, key);
            check_range(cfg.detect_noise.a0 > 0.0, key, "must be positive");
        } else if (key == "detect.path") {
            cfg.detect_path = get_string(value, key);
        } else if (key == "labeler.max_misses") {
            cfg.labeler_max_misses = static_cast<int>(get_int(value, key));
            check_range(cfg.labeler_max_misses >= 0, key, "must be >= 0");
        } else if (key == "labeler.loss_threshold") {
            cfg.labeler_loss_threshold = get_number(value, key);
            check_range(cfg.labeler_loss_threshold >= 0.0, key, "must be >= 0");
        } else if (key == "labeler.allow_unseeded_tracks") {
            cfg.labeler_allow_unseeded_tracks = get_bool(value, key);
        } else if (key == "labeler.correct_classes") {
            cfg.labeler_correct_classes = get_bool(value, key);
        } else if (key == "scene.width") {
            cfg.scene_width = get_number(value, key);
            check_range(cfg.scene_width > 0.0, key, "must be positive");
        } else if (key == "scene.height") {
            cfg.scene_height = get_number(value, key);
            check_range(cfg.scene_height > 0.0, key, "must be positive");
        } else if (key == "scene.frames") {
            cfg.scene_frames = get_int(value, key);
            check_range(cfg.scene_frames >= 1, key, "must be >= 1");
        } else if (key == "scene.objects") {
            cfg.scene_objects = static_cast<int>(get_int(value, key));
            check_range(cfg.scene_objects >= 1 && cfg.scene_objects <= 256, key,
                        "must lie in [1, 256]");
        } else if (key == "scene.sequences") {
            cfg.scene_sequences = static_cast<int>(get_int(value, key));
            check_range(cfg.scene_sequences >= 1 && cfg.scene_sequences <= 1024, key,
                        "must lie in [1, 1024]");
        } else if (key == "scene.keyframe_interval") {
            cfg.scene_keyframe_interval = get_int(value, key);
            check_range(cfg.scene_keyframe_interval >= 1, key, "must be >= 1");
        } else if (key == "scene.min_visible_area") {
            cfg.scene_min_visible_area = get_number(value, key);
            check_range(cfg.scene_min_visible_area >= 0.0, key, "must be >= 0");
        } else if (key == "sampler.weighting") {
            cfg.sampler_weighting = get_string(value, key);
            check_range(cfg.sampler_weighting == "raw" || cfg.sampler_weighting == "standardized",
                        key, "must be \"raw\" or \"standardized\"");
        } else if (key == "sampler.aggregate") {
            cfg.sampler_aggregate = get_string(value, key);
            check_range(cfg.sampler_aggregate == "sum" || cfg.sampler_aggregate == "mean" ||
                            cfg.sampler_aggregate == "max",
                        key, "must be \"sum\", \"mean\" or \"max\"");
        } else if (key == "sampler.mode") {
            cfg.sampler_mode = get_string(value, key);
            check_range(cfg.sampler_mode == "bernoulli" || cfg.sampler_mode == "multinomial", key,
                        "must be \"bernoulli\" or \"multinomial\"");
        } else if (key == "seed") {
            const std::int64_t s = get_int(value, key);
            check_range(s >= 0, key, "must be >= 0");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else {
            throw ConfigError("unknown config key \"" + key + "\"");
        }
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path.string());
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    return config_from_json(j);
}

ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json j;
    j["kalman.p0_diag"] = cfg.kalman.p0_diag;
    j["kalman.q_diag"] = cfg.kalman.q_diag;
    j["kalman.r_diag"] = cfg.kalman.r_diag;
    j["kalman.s_min"] = cfg.kalman.s_min;
    j["assoc.iou_min"] = cfg.assoc_iou_min;
    j["detect.kind"] = cfg.detect_kind;
    j["detect.hit_min"] = cfg.detect_noise.hit_min;
    j["detect.sigma_reg"] = cfg.detect_noise.sigma_reg;
    j["detect.beta"] = cfg.detect_noise.beta;
    j["detect.a0"] = cfg.detect_noise.a0;
    j["detect.path"] = cfg.detect_path;
    j["labeler.max_misses"] = cfg.labeler_max_misses;
    j["labeler.loss_threshold"] = cfg.labeler_loss_threshold;
    j["labeler.allow_unseeded_tracks"] = cfg.labeler_allow_unseeded_tracks;
    j["labeler.correct_classes"] = cfg.labeler_correct_classes;
    j["scene.width"] = cfg.scene_width;
    j["scene.height"] = cfg.scene_height;
    j["scene.frames"] = cfg.scene_frames;
    j["scene.objects"] = cfg.scene_objects;
    j["scene.sequences"] = cfg.scene_sequences;
    j["scene.keyframe_interval"] = cfg.scene_keyframe_interval;
    j["scene.min_visible_area"] = cfg.scene_min_visible_area;
    j["sampler.weighting"] = cfg.sampler_weighting;
    j["sampler.aggregate"] = cfg.sampler_aggregate;
    j["sampler.mode"] = cfg.sampler_mode;
    j["seed"] = cfg.seed;
    return j;
}

int worker_count() {
    const char* env = std::getenv("NEARFAR_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
        throw ConfigError("NEARFAR_THREADS must be a positive integer");
    }
    return static_cast<int>(std::min<long>(n, 256));
}

}  // namespace nearfar
