#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "nearfar/commands.hpp"
#include "nearfar/dataio.hpp"
#include "nearfar/errors.hpp"

using namespace nearfar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("nearfar_cmd_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

LabelRecord loss_record(const std::string& seq, std::int64_t frame, double loss) {
    LabelRecord rec;
    rec.seq = seq;
    rec.det = Detection{frame, CornerBox{0, 0, 10, 10}, 0, 1.0, loss, Source::Detector};
    return rec;
}

}  // namespace

TEST_CASE("aggregate_image_losses groups by (seq, frame)") {
    std::vector<LabelRecord> records;
    records.push_back(loss_record("a", 0, 1.0));
    records.push_back(loss_record("a", 0, 3.0));
    records.push_back(loss_record("a", 1, 2.0));
    records.push_back(loss_record("b", 0, 5.0));

    PipelineConfig cfg;
    SUBCASE("sum") {
        const auto images = aggregate_image_losses(records, cfg);
        REQUIRE(images.size() == 3);
        CHECK(images[0].seq == "a");
        CHECK(images[0].frame == 0);
        CHECK(images[0].loss == 4.0);
        CHECK(images[1].loss == 2.0);
        CHECK(images[2].seq == "b");
        CHECK(images[2].loss == 5.0);
    }
    SUBCASE("mean") {
        cfg.sampler_aggregate = "mean";
        CHECK(aggregate_image_losses(records, cfg)[0].loss == 2.0);
    }
    SUBCASE("max") {
        cfg.sampler_aggregate = "max";
        CHECK(aggregate_image_losses(records, cfg)[0].loss == 3.0);
    }
}

TEST_CASE("sample_image_indices modes") {
    std::vector<ImageLoss> images;
    for (int i = 0; i < 10; ++i) images.push_back(ImageLoss{"a", i, 1.0 + i});
    PipelineConfig cfg;
    cfg.seed = 9;

    SUBCASE("fraction 1.0 keeps everything, including zero-loss images") {
        images[0].loss = 0.0;
        const auto kept = sample_image_indices(images, 1.0, std::nullopt, cfg, cfg.seed);
        CHECK(kept.size() == images.size());
    }
    SUBCASE("M >= N keeps everything") {
        const auto kept = sample_image_indices(images, std::nullopt, 25, cfg, cfg.seed);
        CHECK(kept.size() == images.size());
    }
    SUBCASE("bernoulli and multinomial both honor the target loosely") {
        const auto bern = sample_image_indices(images, 0.5, std::nullopt, cfg, cfg.seed);
        CHECK(bern.size() <= images.size());
        cfg.sampler_mode = "multinomial";
        const auto multi = sample_image_indices(images, 0.5, std::nullopt, cfg, cfg.seed);
        CHECK(!multi.empty());
        CHECK(multi.size() <= 5);  // 5 draws with replacement give at most 5 distinct
    }
    SUBCASE("standardized weighting is accepted") {
        cfg.sampler_weighting = "standardized";
        CHECK_NOTHROW(sample_image_indices(images, 0.5, std::nullopt, cfg, cfg.seed));
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(sample_image_indices(images, std::nullopt, std::nullopt, cfg, 1),
                        UsageError);
        CHECK_THROWS_AS(sample_image_indices(images, 0.5, 5, cfg, 1), UsageError);
        CHECK_THROWS_AS(sample_image_indices(images, 1.5, std::nullopt, cfg, 1), UsageError);
        CHECK_THROWS_AS(sample_image_indices(images, std::nullopt, 0, cfg, 1), UsageError);
    }
}

TEST_CASE("parse_fraction_grid forms") {
    const auto def = parse_fraction_grid("");
    REQUIRE(def.size() == 20);
    CHECK(def.front() == 0.05);
    CHECK(def.back() == 1.0);

    const auto range = parse_fraction_grid("0.2:1.0:0.2");
    REQUIRE(range.size() == 5);
    CHECK(range.back() == 1.0);

    const auto list = parse_fraction_grid("0.1,0.5,1.0");
    REQUIRE(list.size() == 3);
    CHECK(list[1] == 0.5);

    CHECK_THROWS_AS(parse_fraction_grid("0.5:"), UsageError);
    CHECK_THROWS_AS(parse_fraction_grid("abc"), UsageError);
}

TEST_CASE("label command runs KITTI ground truth against stored detections") {
    TempDir tmp;
    const fs::path kitti = tmp.path / "training";
    fs::create_directories(kitti);
    // Keyframes 0 and 4 with one static car; a detection store fills 1-3.
    std::ofstream(kitti / "000000.txt") << "Car 0 0 0 100 100 200 200 0 0 0 0 0 0 0\n";
    std::ofstream(kitti / "000004.txt") << "Car 0 0 0 100 100 200 200 0 0 0 0 0 0 0\n";

    FileDetector::Store store;
    for (std::int64_t f = 1; f <= 3; ++f) {
        store[f] = {FileDetector::Stored{CornerBox{100, 100, 200, 200}, 0, 0.9, 0.105}};
    }
    const fs::path dets = tmp.path / "training.jsonl";
    write_detections(dets, store);

    PipelineConfig cfg;
    cfg.scene_keyframe_interval = 4;
    cfg.detect_kind = "file";
    cfg.detect_path = tmp.path.string();  // directory: <seq>.jsonl per sequence

    const fs::path out = tmp.path / "labels.jsonl";
    cmd_label(cfg, kitti, out);
    const auto labels = read_labels(out);
    REQUIRE(labels.size() == 5);
    for (const auto& rec : labels) {
        CHECK(rec.seq == "training");
        CHECK(rec.det.class_id == 0);
        CHECK(rec.det.box == CornerBox{100, 100, 200, 200});
        const bool keyframe = rec.det.frame_id % 4 == 0;
        CHECK(rec.det.source == (keyframe ? Source::GroundTruth : Source::Detector));
    }
}

TEST_CASE("multi-sequence labeling merges deterministically") {
    TempDir tmp;
    PipelineConfig cfg;
    cfg.scene_sequences = 3;
    cfg.scene_frames = 11;
    cfg.scene_objects = 2;
    cfg.scene_keyframe_interval = 5;
    cfg.seed = 4;

    cmd_simulate(cfg, tmp.path / "scenes");
    CHECK(fs::exists(tmp.path / "scenes" / "seq0.jsonl"));
    CHECK(fs::exists(tmp.path / "scenes" / "seq1.jsonl"));
    CHECK(fs::exists(tmp.path / "scenes" / "seq2.jsonl"));

    cmd_label(cfg, tmp.path / "scenes", tmp.path / "labels.jsonl");
    const auto labels = read_labels(tmp.path / "labels.jsonl");
    std::set<std::string> seqs;
    std::string prev_seq;
    std::int64_t prev_frame = -1;
    for (const auto& rec : labels) {
        seqs.insert(rec.seq);
        if (rec.seq == prev_seq) {
            CHECK(rec.det.frame_id >= prev_frame);  // sorted within a sequence
        } else {
            CHECK(rec.seq > prev_seq);  // sequences in order
            prev_frame = -1;
        }
        prev_seq = rec.seq;
        prev_frame = rec.det.frame_id;
    }
    CHECK(seqs.size() == 3);
}
