#include "nearfar/labeler.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "nearfar/errors.hpp"

namespace nearfar {

Detection correct_near_to_far(const Track& track, Detection det) {
    if (track.history.empty()) return det;
    if (det.class_id != track.canonical_class) {
        det.class_id = track.canonical_class;
        det.source = Source::Corrected;
    }
    return det;
}

void refresh_canonical_class(Track& track) {
    if (track.history.empty()) return;
    const Detection* best = &track.history.front();
    for (const auto& det : track.history) {
        if (det.box.area() > best->box.area()) best = &det;
    }
    track.canonical_class = best->class_id;
}

TrackBackLabeler::TrackBackLabeler(std::string seq, LabelerParams params, const Detector& detector)
    : seq_(std::move(seq)), params_(params), detector_(detector) {}

LabelRecord TrackBackLabeler::make_record(const Detection& det, int track_id) const {
    return LabelRecord{seq_, det, track_id, det.loss > params_.loss_threshold};
}

std::vector<Track> TrackBackLabeler::seed_from_keyframe(std::int64_t frame_id,
                                                        const std::vector<GtEntry>& entries) {
    std::vector<Track> trackers;
    trackers.reserve(entries.size());
    for (const auto& entry : entries) {
        Track t;
        t.track_id = next_track_id_++;
        t.state = init_state(corner_to_state(entry.box), params_.kalman);
        t.canonical_class = entry.class_id;
        t.history.push_back(
            Detection{frame_id, entry.box, entry.class_id, 1.0, 0.0, Source::GroundTruth});
        t.seeded_from_gt = true;
        trackers.push_back(std::move(t));
    }
    return trackers;
}

std::vector<LabelRecord> TrackBackLabeler::step_back(std::vector<Track>& trackers,
                                                     std::int64_t frame_id) {
    for (const auto& t : trackers) {
        if (!t.history.empty() && t.history.back().frame_id <= frame_id) {
            throw std::invalid_argument("step_back: frame ids must decrease in reverse time");
        }
    }

    // 1. Predictions become the region proposals.
    std::vector<CornerBox> proposals;
    proposals.reserve(trackers.size());
    for (auto& t : trackers) {
        const KalmanPrediction pred = predict(t.state, params_.kalman);
        t.state = pred.state;
        proposals.push_back(state_to_corner(pred.box));
    }

    // 2. Detector answers one slot per proposal.
    const auto slots = detector_.detect(frame_id, proposals);
    if (slots.size() != proposals.size()) {
        throw NumericError("detector broke the one-slot-per-proposal contract");
    }
    std::vector<Detection> detections;
    for (const auto& slot : slots) {
        if (slot.has_value()) detections.push_back(*slot);
    }
    std::vector<CornerBox> det_boxes;
    det_boxes.reserve(detections.size());
    for (const auto& d : detections) det_boxes.push_back(d.box);

    // 3. Associate detections with tracker predictions.
    const MatchResult match = match_detections(det_boxes, proposals, params_.iou_min);

    std::vector<LabelRecord> records;

    // 4. Matched pairs: Kalman update, near-field correction, record.
    for (const auto& [d, t] : match.matched) {
        Track& track = trackers[static_cast<std::size_t>(t)];
        Detection det = detections[static_cast<std::size_t>(d)];
        if (params_.correct_classes) det = correct_near_to_far(track, det);
        track.state = update(track.state, corner_to_state(det.box), params_.kalman);
        track.misses = 0;
        track.history.push_back(det);
        refresh_canonical_class(track);
        records.push_back(make_record(det, track.track_id));
    }

    // 5. Unmatched detections spawn new (non-GT) trackers.
    for (int d : match.unmatched_detections) {
        if (!params_.allow_unseeded_tracks) continue;
        const Detection& det = detections[static_cast<std::size_t>(d)];
        Track t;
        t.track_id = next_track_id_++;
        t.state = init_state(corner_to_state(det.box), params_.kalman);
        t.canonical_class = det.class_id;
        t.history.push_back(det);
        t.seeded_from_gt = false;
        records.push_back(make_record(det, t.track_id));
        trackers.push_back(std::move(t));
    }

    // 6. Unmatched trackers age and eventually retire.
    for (int t : match.unmatched_trackers) {
        trackers[static_cast<std::size_t>(t)].misses += 1;
    }
    std::erase_if(trackers, [&](const Track& t) { return t.misses > params_.max_misses; });

    return records;
}

std::vector<LabelRecord> TrackBackLabeler::label_sequence(const GtMap& sparse_gt,
                                                          std::int64_t frame_lo,
                                                          std::int64_t frame_hi) {
    if (sparse_gt.empty()) {
        throw std::invalid_argument("label_sequence: no keyframes");
    }

    std::vector<std::int64_t> keyframes;
    for (const auto& [frame, entries] : sparse_gt) {
        if (frame < frame_lo || frame > frame_hi) {
            throw std::invalid_argument("label_sequence: keyframe " + std::to_string(frame) +
                                        " outside the frame range");
        }
        keyframes.push_back(frame);
    }
    std::sort(keyframes.rbegin(), keyframes.rend());

    std::vector<LabelRecord> records;
    for (std::size_t i = 0; i < keyframes.size(); ++i) {
        const std::int64_t kf = keyframes[i];
        const std::int64_t lower = i + 1 < keyframes.size() ? keyframes[i + 1] : frame_lo - 1;

        std::vector<Track> trackers = seed_from_keyframe(kf, sparse_gt.at(kf));
        for (const auto& t : trackers) {
            records.push_back(make_record(t.history.front(), t.track_id));
        }
        for (std::int64_t frame = kf - 1; frame > lower; --frame) {
            auto step_records = step_back(trackers, frame);
            records.insert(records.end(), std::make_move_iterator(step_records.begin()),
                           std::make_move_iterator(step_records.end()));
        }
    }
    return records;
}

}  // namespace nearfar
