#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "nearfar/geom.hpp"

namespace nearfar {

// One object moving toward the camera on a pinhole-projected straight path.
// Depth follows z(t) = z0 - speed·t, so the projected box grows over time.
struct SceneObject {
    int id = 0;
    int class_id = 0;
    double size = 1.0;           // world extent, meters
    double z0 = 10.0;            // initial depth, meters
    double speed = 0.0;          // depth decrease per frame
    double lateral_offset = 0.0; // world x offset, meters
    double lateral_drift = 0.0;  // world x change per frame
    double focal = 600.0;        // pixels
};

struct SceneSpec {
    double width = 1280.0;
    double height = 384.0;
    std::int64_t frame_count = 101;
    std::vector<SceneObject> objects;
    std::uint64_t seed = 0;
    double min_visible_area = 16.0;  // boxes smaller than this are omitted
    double z_min = 1.0;              // objects never get closer than this
};

struct GtEntry {
    int object_id = 0;
    int class_id = 0;
    CornerBox box;

    friend bool operator==(const GtEntry&, const GtEntry&) = default;
};

// Ground truth per frame. Every frame in range is present, possibly empty.
using GtMap = std::map<std::int64_t, std::vector<GtEntry>>;

// Projects every object into every frame, clipping to the image and dropping
// boxes below min_visible_area. Throws std::invalid_argument when the spec
// violates its invariants (frame_count < 1, object passing z_min, ...).
GtMap generate_scene(const SceneSpec& spec);

// Keeps only frames ≡ 0 (mod k). k = 1 is the identity.
GtMap sparsify(const GtMap& gt, std::int64_t k);

// Procedural desk-scale scene: `object_count` objects across 3 classes with
// seeded sizes, depths, speeds and lanes, all chosen so every object stays
// visible and inside the image for the whole clip.
SceneSpec default_scene_spec(double width, double height, std::int64_t frame_count,
                             int object_count, std::uint64_t seed);

}  // namespace nearfar
