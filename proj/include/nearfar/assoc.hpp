#pragma once

#include <utility>
#include <vector>

#include "nearfar/geom.hpp"

namespace nearfar {

// Outcome of matching detections (rows) against tracker predictions (cols).
// Indices partition both input lists; matched pairs all meet the IoU floor.
struct MatchResult {
    std::vector<std::pair<int, int>> matched;  // (detection, tracker)
    std::vector<int> unmatched_detections;
    std::vector<int> unmatched_trackers;
};

// Maximum-total-score one-to-one assignment of rows to columns. Returns
// min(rows, cols) pairs sorted by row. Optimal (Hungarian), with ties between
// equal-total assignments broken toward the lexicographically smallest pair
// list. Scores must be finite values in [0, 1].
std::vector<std::pair<int, int>> solve_assignment(
    const std::vector<std::vector<double>>& scores);

// IoU matrix + optimal assignment + threshold filter: assigned pairs below
// iou_min are demoted to unmatched on both sides.
MatchResult match_detections(const std::vector<CornerBox>& detections,
                             const std::vector<CornerBox>& predictions, double iou_min);

}  // namespace nearfar
