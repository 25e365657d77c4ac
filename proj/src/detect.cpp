#include "nearfar/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nearfar/errors.hpp"
#include "nearfar/rng.hpp"

namespace nearfar {

namespace {

constexpr double kMinScore = 1e-6;
constexpr double kMinSide = 1e-3;

double detection_loss(double score) { return std::max(0.0, -std::log(std::max(score, kMinScore))); }

// Keeps a perturbed box valid by enforcing a tiny minimum side.
CornerBox repair(CornerBox b) {
    if (b.x2 - b.x1 < kMinSide) {
        const double cx = (b.x1 + b.x2) / 2.0;
        b.x1 = cx - kMinSide / 2.0;
        b.x2 = cx + kMinSide / 2.0;
    }
    if (b.y2 - b.y1 < kMinSide) {
        const double cy = (b.y1 + b.y2) / 2.0;
        b.y1 = cy - kMinSide / 2.0;
        b.y2 = cy + kMinSide / 2.0;
    }
    return b;
}

}  // namespace

std::string to_string(Source s) {
    switch (s) {
        case Source::GroundTruth: return "gt";
        case Source::Detector: return "det";
        case Source::Corrected: return "corrected";
    }
    throw std::invalid_argument("unknown source");
}

Source source_from_string(const std::string& s) {
    if (s == "gt") return Source::GroundTruth;
    if (s == "det") return Source::Detector;
    if (s == "corrected") return Source::Corrected;
    throw SchemaError("unknown source value: \"" + s + "\"");
}

SyntheticDetector::SyntheticDetector(const GtMap* gt, std::int64_t frame_lo, std::int64_t frame_hi,
                                     NoiseConfig noise, std::uint64_t seed, int num_classes)
    : gt_(gt), frame_lo_(frame_lo), frame_hi_(frame_hi), noise_(noise), seed_(seed),
      num_classes_(num_classes) {
    if (gt_ == nullptr) throw std::invalid_argument("SyntheticDetector: null ground truth");
    if (num_classes_ < 2) throw std::invalid_argument("SyntheticDetector: need >= 2 classes");
    if (noise_.beta < 0.0 || noise_.beta > 1.0 || noise_.a0 <= 0.0 || noise_.sigma_reg < 0.0 ||
        noise_.hit_min < 0.0 || noise_.hit_min > 1.0) {
        throw std::invalid_argument("SyntheticDetector: noise parameters out of range");
    }
}

std::vector<std::optional<Detection>> SyntheticDetector::detect(
    std::int64_t frame_id, const std::vector<CornerBox>& proposals) const {
    if (frame_id < frame_lo_ || frame_id > frame_hi_) {
        throw std::invalid_argument("SyntheticDetector: frame " + std::to_string(frame_id) +
                                    " outside the scene range");
    }
    static const std::vector<GtEntry> kEmpty;
    const auto it = gt_->find(frame_id);
    const std::vector<GtEntry>& entries = it == gt_->end() ? kEmpty : it->second;

    std::vector<std::optional<Detection>> out(proposals.size());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        double best_iou = 0.0;
        const GtEntry* best = nullptr;
        for (const auto& entry : entries) {
            const double v = iou(proposals[i], entry.box);
            if (v > best_iou) {
                best_iou = v;
                best = &entry;
            }
        }
        if (best == nullptr || best_iou < noise_.hit_min) continue;

        Rng rng(derive_seed({seed_, static_cast<std::uint64_t>(frame_id), i}));
        const double gt_area = best->box.area();
        const double sigma = noise_.sigma_reg * std::sqrt(gt_area);

        CornerBox box = best->box;
        box.x1 += rng.gaussian() * sigma;
        box.y1 += rng.gaussian() * sigma;
        box.x2 += rng.gaussian() * sigma;
        box.y2 += rng.gaussian() * sigma;
        box = repair(box);

        const double p_correct = 1.0 - noise_.beta * std::exp(-gt_area / noise_.a0);
        Detection det;
        det.frame_id = frame_id;
        det.box = box;
        det.source = Source::Detector;
        if (rng.uniform01() < p_correct) {
            det.class_id = best->class_id;
            det.score = p_correct;
        } else {
            // Uniform draw over the other classes.
            const auto shift =
                1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes_ - 1)));
            det.class_id = (best->class_id + shift) % num_classes_;
            det.score = (1.0 - p_correct) / static_cast<double>(num_classes_ - 1);
        }
        det.loss = detection_loss(det.score);
        out[i] = det;
    }
    return out;
}

FileDetector::FileDetector(Store store, double hit_min)
    : store_(std::move(store)), hit_min_(hit_min) {
    if (hit_min_ < 0.0 || hit_min_ > 1.0) {
        throw std::invalid_argument("FileDetector: hit_min must lie in [0, 1]");
    }
}

std::vector<std::optional<Detection>> FileDetector::detect(
    std::int64_t frame_id, const std::vector<CornerBox>& proposals) const {
    std::vector<std::optional<Detection>> out(proposals.size());
    const auto it = store_.find(frame_id);
    if (it == store_.end()) return out;  // no detections stored for this frame

    const std::vector<Stored>& cands = it->second;
    std::vector<char> consumed(cands.size(), 0);

    for (std::size_t i = 0; i < proposals.size(); ++i) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (consumed[c]) continue;
            const double v = iou(proposals[i], cands[c].box);
            if (v < hit_min_) continue;
            const bool better =
                best < 0 || v > best_iou ||
                (v == best_iou && cands[c].score > cands[static_cast<std::size_t>(best)].score);
            if (better) {
                best = static_cast<int>(c);
                best_iou = v;
            }
        }
        if (best < 0) continue;
        consumed[static_cast<std::size_t>(best)] = 1;
        const Stored& s = cands[static_cast<std::size_t>(best)];
        out[i] = Detection{frame_id, s.box, s.class_id, s.score, s.loss, Source::Detector};
    }
    return out;
}

}  // namespace nearfar
