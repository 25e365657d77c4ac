#pragma once

#include <cstdint>
#include <vector>

#include "nearfar/labeler.hpp"

namespace nearfar {

struct ClassEval {
    int class_id = 0;
    double ap = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t gt_count = 0;
};

struct EvalReport {
    std::vector<ClassEval> per_class;  // classes present in the ground truth
    double map = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

// Average precision per class at a fixed IoU threshold: predictions sorted by
// descending score, greedily matched one-to-one against same-image ground
// truth, AP as the area under the precision-envelope-interpolated PR curve.
// mAP averages over classes present in the ground truth. Result is invariant
// to the order of the input records.
EvalReport eval_ap(const std::vector<LabelRecord>& predictions,
                   const std::vector<LabelRecord>& ground_truth, double iou_threshold);

}  // namespace nearfar
