#include "nearfar/simscene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nearfar/rng.hpp"

namespace nearfar {

namespace {

void validate(const SceneSpec& spec) {
    if (spec.frame_count < 1) throw std::invalid_argument("scene: frame_count must be >= 1");
    if (spec.width <= 0.0 || spec.height <= 0.0) {
        throw std::invalid_argument("scene: image dimensions must be positive");
    }
    if (spec.z_min <= 0.0) throw std::invalid_argument("scene: z_min must be positive");
    for (const auto& obj : spec.objects) {
        if (obj.size <= 0.0 || obj.z0 <= 0.0 || obj.speed < 0.0 || obj.focal <= 0.0) {
            throw std::invalid_argument("scene: object " + std::to_string(obj.id) +
                                        " has non-positive size/depth/focal or negative speed");
        }
        const double z_end = obj.z0 - obj.speed * static_cast<double>(spec.frame_count - 1);
        if (z_end <= spec.z_min) {
            throw std::invalid_argument("scene: object " + std::to_string(obj.id) +
                                        " passes the camera before the clip ends");
        }
    }
}

}  // namespace

GtMap generate_scene(const SceneSpec& spec) {
    validate(spec);
    GtMap gt;
    for (std::int64_t t = 0; t < spec.frame_count; ++t) {
        auto& frame = gt[t];
        for (const auto& obj : spec.objects) {
            const double z = obj.z0 - obj.speed * static_cast<double>(t);
            const double side = obj.focal * obj.size / z;
            const double cx =
                spec.width / 2.0 +
                obj.focal * (obj.lateral_offset + obj.lateral_drift * static_cast<double>(t)) / z;
            const double cy = spec.height / 2.0;

            const double x1 = std::max(0.0, cx - side / 2.0);
            const double y1 = std::max(0.0, cy - side / 2.0);
            const double x2 = std::min(spec.width, cx + side / 2.0);
            const double y2 = std::min(spec.height, cy + side / 2.0);
            if (x2 - x1 <= 0.0 || y2 - y1 <= 0.0) continue;

            const CornerBox box{x1, y1, x2, y2};
            if (box.area() < spec.min_visible_area) continue;
            frame.push_back(GtEntry{obj.id, obj.class_id, box});
        }
    }
    return gt;
}

GtMap sparsify(const GtMap& gt, std::int64_t k) {
    if (k < 1) throw std::invalid_argument("sparsify: keyframe interval must be >= 1");
    GtMap out;
    for (const auto& [frame, entries] : gt) {
        if (frame % k == 0) out[frame] = entries;
    }
    return out;
}

SceneSpec default_scene_spec(double width, double height, std::int64_t frame_count,
                             int object_count, std::uint64_t seed) {
    if (object_count < 1) throw std::invalid_argument("scene: object_count must be >= 1");

    SceneSpec spec;
    spec.width = width;
    spec.height = height;
    spec.frame_count = frame_count;
    spec.seed = seed;

    // Size/depth ranges per class: {size_lo, size_hi, z0_lo, z0_hi}.
    constexpr double ranges[3][4] = {
        {2.0, 2.6, 45.0, 65.0},  // car
        {1.0, 1.3, 25.0, 40.0},  // pedestrian
        {1.2, 1.6, 30.0, 45.0},  // cyclist
    };
    constexpr int class_pattern[8] = {0, 1, 2, 0, 1, 2, 0, 0};

    const double focal = 600.0;
    const double z_floor = 6.5;  // keeps the largest box well inside the image
    const int n = object_count;

    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed({seed, 0x5ce11eULL, static_cast<std::uint64_t>(i)}));
        SceneObject obj;
        obj.id = i;
        obj.class_id = class_pattern[i % 8];
        const double* r = ranges[obj.class_id];
        obj.size = r[0] + (r[1] - r[0]) * rng.uniform01();
        obj.z0 = r[2] + (r[3] - r[2]) * rng.uniform01();
        obj.focal = focal;

        // Aim for a seeded final depth, clamped so the spec invariant holds.
        const double z_end = z_floor + 5.0 * rng.uniform01();
        const double steps = static_cast<double>(std::max<std::int64_t>(frame_count - 1, 1));
        obj.speed = std::max(0.0, (obj.z0 - z_end) / steps);

        // Distinct lanes, center-out, so boxes rarely coincide.
        const double lane_span = 10.4;
        const double lane =
            n == 1 ? 0.0 : -lane_span / 2.0 + lane_span * static_cast<double>(i) / (n - 1);
        obj.lateral_offset = lane + 0.2 * (rng.uniform01() - 0.5);
        obj.lateral_drift = 0.01 * (rng.uniform01() - 0.5);

        spec.objects.push_back(obj);
    }
    validate(spec);
    return spec;
}

}  // namespace nearfar
