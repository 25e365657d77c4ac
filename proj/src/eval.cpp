#include "nearfar/eval.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace nearfar {

namespace {

using ImageKey = std::pair<std::string, std::int64_t>;  // (seq, frame)

std::tuple<double, double, double, double> box_key(const CornerBox& b) {
    return {b.x1, b.y1, b.x2, b.y2};
}

}  // namespace

EvalReport eval_ap(const std::vector<LabelRecord>& predictions,
                   const std::vector<LabelRecord>& ground_truth, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw std::invalid_argument("eval_ap: iou_threshold must lie in (0, 1)");
    }
    if (ground_truth.empty()) {
        throw std::invalid_argument("eval_ap: empty ground truth");
    }

    // Ground truth per (class, image), in a deterministic within-image order.
    std::map<int, std::map<ImageKey, std::vector<const LabelRecord*>>> gt_by_class;
    std::set<int> gt_classes;
    for (const auto& rec : ground_truth) {
        gt_by_class[rec.det.class_id][{rec.seq, rec.det.frame_id}].push_back(&rec);
        gt_classes.insert(rec.det.class_id);
    }
    for (auto& [cls, images] : gt_by_class) {
        for (auto& [key, recs] : images) {
            std::sort(recs.begin(), recs.end(), [](const LabelRecord* a, const LabelRecord* b) {
                return box_key(a->det.box) < box_key(b->det.box);
            });
        }
    }

    std::map<int, std::vector<const LabelRecord*>> pred_by_class;
    for (const auto& rec : predictions) pred_by_class[rec.det.class_id].push_back(&rec);

    EvalReport report;
    double ap_sum = 0.0;

    for (int cls : gt_classes) {
        auto& gt_images = gt_by_class[cls];
        std::int64_t gt_count = 0;
        std::map<ImageKey, std::vector<char>> taken;
        for (const auto& [key, recs] : gt_images) {
            gt_count += static_cast<std::int64_t>(recs.size());
            taken[key].assign(recs.size(), 0);
        }

        std::vector<const LabelRecord*> preds;
        if (const auto it = pred_by_class.find(cls); it != pred_by_class.end()) preds = it->second;
        // Total order so shuffled inputs produce the same curve.
        std::sort(preds.begin(), preds.end(), [](const LabelRecord* a, const LabelRecord* b) {
            return std::make_tuple(-a->det.score, a->seq, a->det.frame_id, box_key(a->det.box)) <
                   std::make_tuple(-b->det.score, b->seq, b->det.frame_id, box_key(b->det.box));
        });

        ClassEval ce;
        ce.class_id = cls;
        ce.gt_count = gt_count;

        std::vector<char> is_tp;
        is_tp.reserve(preds.size());
        for (const LabelRecord* pred : preds) {
            const ImageKey key{pred->seq, pred->det.frame_id};
            const auto it = gt_images.find(key);
            int best = -1;
            double best_iou = 0.0;
            if (it != gt_images.end()) {
                const auto& recs = it->second;
                auto& used = taken[key];
                for (std::size_t g = 0; g < recs.size(); ++g) {
                    if (used[g]) continue;
                    const double v = iou(pred->det.box, recs[g]->det.box);
                    if (v >= iou_threshold && v > best_iou) {
                        best = static_cast<int>(g);
                        best_iou = v;
                    }
                }
            }
            if (best >= 0) {
                taken[key][static_cast<std::size_t>(best)] = 1;
                is_tp.push_back(1);
            } else {
                is_tp.push_back(0);
            }
        }

        // PR curve and the precision-envelope area.
        std::vector<double> precision;
        std::vector<double> recall;
        std::int64_t tp = 0;
        std::int64_t fp = 0;
        for (char hit : is_tp) {
            hit ? ++tp : ++fp;
            precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
            recall.push_back(gt_count > 0 ? static_cast<double>(tp) / static_cast<double>(gt_count)
                                          : 0.0);
        }
        double ap = 0.0;
        if (!precision.empty()) {
            for (std::size_t i = precision.size(); i-- > 1;) {
                precision[i - 1] = std::max(precision[i - 1], precision[i]);
            }
            double prev_recall = 0.0;
            for (std::size_t i = 0; i < precision.size(); ++i) {
                ap += (recall[i] - prev_recall) * precision[i];
                prev_recall = recall[i];
            }
        }

        ce.ap = ap;
        ce.tp = tp;
        ce.fp = fp;
        ce.fn = gt_count - tp;
        report.per_class.push_back(ce);
        report.tp += ce.tp;
        report.fp += ce.fp;
        report.fn += ce.fn;
        ap_sum += ce.ap;
    }

    // Predictions of classes absent from the ground truth are still false
    // positives for the totals.
    for (const auto& [cls, preds] : pred_by_class) {
        if (!gt_classes.contains(cls)) report.fp += static_cast<std::int64_t>(preds.size());
    }

    report.map = ap_sum / static_cast<double>(report.per_class.size());
    return report;
}

}  // namespace nearfar
