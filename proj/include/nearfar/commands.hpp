#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nearfar/config.hpp"
#include "nearfar/eval.hpp"
#include "nearfar/sampler.hpp"

namespace nearfar {

// Per-image loss after aggregating a sequence's records, keyed for
// deterministic ordering.
struct ImageLoss {
    std::string seq;
    std::int64_t frame = 0;
    double loss = 0.0;
};

// Groups records by (seq, frame) and aggregates their losses per
// cfg.sampler_aggregate. Items come back sorted by key.
std::vector<ImageLoss> aggregate_image_losses(const std::vector<LabelRecord>& records,
                                              const PipelineConfig& cfg);

// Runs the track-back pass for one sequence: sparsifies the ground truth at
// the configured keyframe interval, builds the configured detector, labels
// backward from each keyframe, and returns records sorted by (frame, track).
std::vector<LabelRecord> run_label_sequence(const std::string& seq, const GtMap& full_gt,
                                            const PipelineConfig& cfg);

// Indices of aggregated images kept by one sampling draw. fraction/m:
// exactly one must be set; m >= N keeps everything.
std::vector<std::size_t> sample_image_indices(const std::vector<ImageLoss>& images,
                                              std::optional<double> fraction,
                                              std::optional<std::int64_t> m,
                                              const PipelineConfig& cfg, std::uint64_t seed);

// CLI entry points. Each writes its outputs plus a <out>.meta.json sidecar
// echoing the resolved config and seed.
void cmd_simulate(const PipelineConfig& cfg, const std::filesystem::path& out_dir);
void cmd_label(const PipelineConfig& cfg, const std::filesystem::path& gt_path,
               const std::filesystem::path& out_file);
void cmd_sample(const PipelineConfig& cfg, const std::filesystem::path& labels_file,
                std::optional<double> fraction, std::optional<std::int64_t> m,
                const std::filesystem::path& out_file);
void cmd_efficiency(const PipelineConfig& cfg, const std::filesystem::path& labels_file,
                    const std::vector<double>& grid, const std::filesystem::path& out_csv);
EvalReport cmd_eval(const PipelineConfig& cfg, const std::filesystem::path& pred_path,
                    const std::filesystem::path& gt_path, double iou_threshold,
                    const std::optional<std::filesystem::path>& out_json, bool quiet);
FitResult cmd_analyze(const std::filesystem::path& pairs_csv,
                      const std::optional<std::filesystem::path>& out_json, bool quiet);

// "start:stop:step" or a comma-separated fraction list; empty selects the
// default 0.05..1.00 grid in steps of 0.05.
std::vector<double> parse_fraction_grid(const std::string& text);

}  // namespace nearfar
