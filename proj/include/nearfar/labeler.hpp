#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nearfar/assoc.hpp"
#include "nearfar/detect.hpp"
#include "nearfar/kalman.hpp"
#include "nearfar/simscene.hpp"

namespace nearfar {

// Active tracker. History holds accepted detections in strictly decreasing
// frame order (reverse time); canonical_class is the class of the largest
// detection seen, the near-field vote.
struct Track {
    int track_id = 0;
    KalmanState state;
    int canonical_class = 0;
    std::vector<Detection> history;
    int misses = 0;
    bool seeded_from_gt = false;
};

struct LabelRecord {
    std::string seq;
    Detection det;
    int track_id = 0;
    bool saved = false;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

struct LabelerParams {
    KalmanConfig kalman;
    double iou_min = 0.3;
    int max_misses = 3;
    double loss_threshold = 0.0;
    bool allow_unseeded_tracks = true;
    bool correct_classes = true;
};

// If det disagrees with the track's near-field class, relabel it and mark it
// Corrected; otherwise return it unchanged. New tracks (empty history) pass
// through untouched.
Detection correct_near_to_far(const Track& track, Detection det);

// Largest-area detection in history wins; first occurrence on ties.
void refresh_canonical_class(Track& track);

// Runs the reverse-time labeling pass for one sequence: trackers are seeded
// at each keyframe and stepped backward to the previous keyframe, predictions
// serving as region proposals for the detector.
class TrackBackLabeler {
public:
    TrackBackLabeler(std::string seq, LabelerParams params, const Detector& detector);

    // sparse_gt holds the keyframes; all must lie in [frame_lo, frame_hi].
    std::vector<LabelRecord> label_sequence(const GtMap& sparse_gt, std::int64_t frame_lo,
                                            std::int64_t frame_hi);

    // One reverse-time step over the active tracker list. frame_id must be
    // strictly below every frame already in the trackers' histories.
    std::vector<LabelRecord> step_back(std::vector<Track>& trackers, std::int64_t frame_id);

    // Fresh GT-seeded trackers for one keyframe.
    std::vector<Track> seed_from_keyframe(std::int64_t frame_id,
                                          const std::vector<GtEntry>& entries);

private:
    LabelRecord make_record(const Detection& det, int track_id) const;

    std::string seq_;
    LabelerParams params_;
    const Detector& detector_;
    int next_track_id_ = 0;
};

}  // namespace nearfar
