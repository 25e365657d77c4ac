#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nearfar/geom.hpp"
#include "nearfar/simscene.hpp"

namespace nearfar {

enum class Source { GroundTruth, Detector, Corrected };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

struct Detection {
    std::int64_t frame_id = 0;
    CornerBox box;
    int class_id = 0;
    double score = 1.0;
    double loss = 0.0;
    Source source = Source::Detector;

    friend bool operator==(const Detection&, const Detection&) = default;
};

// Region-proposal detector contract: one output slot per proposal, empty slot
// meaning no detection. Implementations are deterministic given
// (frame_id, proposals, seed) and safe for concurrent calls.
class Detector {
public:
    virtual ~Detector() = default;
    virtual std::vector<std::optional<Detection>> detect(
        std::int64_t frame_id, const std::vector<CornerBox>& proposals) const = 0;
};

struct NoiseConfig {
    double hit_min = 0.2;     // min proposal-vs-GT IoU to produce a detection
    double sigma_reg = 0.02;  // corner noise std, scaled by sqrt(GT area)
    double beta = 0.5;        // misclassification amplitude
    double a0 = 2500.0;       // area scale of the accuracy curve, pixels²
};

// Stands in for a trained detector: snaps each proposal to the best-IoU
// ground-truth box, perturbs its corners, and misclassifies small boxes with
// probability beta·exp(-area/a0). score is the class probability and
// loss = -ln(max(score, 1e-6)). Randomness is derived per
// (seed, frame, proposal index).
class SyntheticDetector : public Detector {
public:
    SyntheticDetector(const GtMap* gt, std::int64_t frame_lo, std::int64_t frame_hi,
                      NoiseConfig noise, std::uint64_t seed, int num_classes = 3);

    std::vector<std::optional<Detection>> detect(
        std::int64_t frame_id, const std::vector<CornerBox>& proposals) const override;

private:
    const GtMap* gt_;
    std::int64_t frame_lo_;
    std::int64_t frame_hi_;
    NoiseConfig noise_;
    std::uint64_t seed_;
    int num_classes_;
};

// Replays stored detector outputs. Each stored detection is consumed at most
// once per detect() call; ties on IoU go to the higher score, then the lower
// stored index.
class FileDetector : public Detector {
public:
    struct Stored {
        CornerBox box;
        int class_id = 0;
        double score = 1.0;
        double loss = 0.0;
    };
    using Store = std::map<std::int64_t, std::vector<Stored>>;

    FileDetector(Store store, double hit_min);

    std::vector<std::optional<Detection>> detect(
        std::int64_t frame_id, const std::vector<CornerBox>& proposals) const override;

private:
    Store store_;
    double hit_min_;
};

}  // namespace nearfar
