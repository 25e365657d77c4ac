#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "nearfar/detect.hpp"
#include "nearfar/kalman.hpp"
#include "nearfar/labeler.hpp"

namespace nearfar {

// Resolved configuration of the whole pipeline: a flat JSON object of dotted
// keys. Unknown keys are rejected and every value is range-checked up front.
struct PipelineConfig {
    KalmanConfig kalman;

    double assoc_iou_min = 0.3;

    std::string detect_kind = "synthetic";  // synthetic | file
    NoiseConfig detect_noise;
    std::string detect_path;

    int labeler_max_misses = 3;
    double labeler_loss_threshold = 0.0;
    bool labeler_allow_unseeded_tracks = true;
    bool labeler_correct_classes = true;

    double scene_width = 1280.0;
    double scene_height = 384.0;
    std::int64_t scene_frames = 101;
    int scene_objects = 8;
    int scene_sequences = 1;
    std::int64_t scene_keyframe_interval = 10;
    double scene_min_visible_area = 16.0;

    std::string sampler_weighting = "raw";   // raw | standardized
    std::string sampler_aggregate = "sum";   // sum | mean | max
    std::string sampler_mode = "bernoulli";  // bernoulli | multinomial

    std::uint64_t seed = 42;

    LabelerParams labeler_params() const;
};

// Applies a flat JSON object of dotted keys over the defaults. Throws
// ConfigError for unknown keys, wrong types, or out-of-range values.
PipelineConfig config_from_json(const nlohmann::ordered_json& j);
PipelineConfig load_config(const std::filesystem::path& path);

// Full resolved key set, for echoing into output metadata.
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

// Worker cap from NEARFAR_THREADS; defaults to 1, clamped to [1, 256].
int worker_count();

}  // namespace nearfar
