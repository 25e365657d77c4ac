#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nearfar/detect.hpp"
#include "nearfar/labeler.hpp"
#include "nearfar/sampler.hpp"
#include "nearfar/simscene.hpp"

namespace nearfar {

using ClassMap = std::map<std::string, int>;

// {"Car": 0, "Pedestrian": 1, "Cyclist": 2}; other tokens are dropped.
ClassMap default_class_map();
std::map<int, std::string> class_names(const ClassMap& map);

// Shortest round-trip decimal for a double; keeps CSV output byte-stable.
std::string format_double(double value);

// ---- labels / ground truth JSONL ----------------------------------------

void write_labels(const std::filesystem::path& path, const std::vector<LabelRecord>& records);
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);

// GT records are label records with source=gt, loss 0, saved true, the object
// id standing in for the track id.
std::vector<LabelRecord> gt_to_records(const std::string& seq, const GtMap& gt);
std::map<std::string, GtMap> records_to_gt(const std::vector<LabelRecord>& records);

// Reads one labels file, every *.jsonl in a directory (meta sidecars
// excluded, filename order), or a KITTI label directory (per-frame *.txt,
// imported with the default class map and the directory name as sequence).
std::vector<LabelRecord> read_labels_any(const std::filesystem::path& path);

// ---- detections JSONL -----------------------------------------------------

FileDetector::Store read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const FileDetector::Store& store);

// ---- KITTI label text -------------------------------------------------------

struct KittiReadResult {
    GtMap gt;
    std::int64_t dropped = 0;  // lines whose class token is not mapped
};

// Reads a directory of per-frame files named by zero-padded frame id.
KittiReadResult read_kitti_labels(const std::filesystem::path& dir, const ClassMap& map);

// Lossy export: one file per frame under dir/<seq>/, score as the trailing
// field; loss, track and saved flags are not representable.
void write_kitti_labels(const std::filesystem::path& dir, const std::vector<LabelRecord>& records,
                        const std::map<int, std::string>& names);

// ---- CSV / JSON ------------------------------------------------------------

void write_efficiency_csv(const std::filesystem::path& path,
                          const std::vector<EfficiencyPoint>& curve);

// Two-column numeric CSV (x,y); a non-numeric first line is treated as a
// header and skipped.
void read_pairs_csv(const std::filesystem::path& path, std::vector<double>& xs,
                    std::vector<double>& ys);

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);
nlohmann::ordered_json read_json_file(const std::filesystem::path& path);

// ---- split utility -----------------------------------------------------------

struct FrameSplit {
    std::vector<std::int64_t> train;
    std::vector<std::int64_t> val;
    std::vector<std::int64_t> test;
};

// Seeded shuffle split; counts must not exceed the frame list.
FrameSplit split_frames(std::vector<std::int64_t> frames, std::int64_t n_train, std::int64_t n_val,
                        std::int64_t n_test, std::uint64_t seed);

}  // namespace nearfar
