#pragma once

namespace nearfar {

// Axis-aligned box as top-left / bottom-right corners, continuous pixels.
struct CornerBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool valid() const;

    friend bool operator==(const CornerBox&, const CornerBox&) = default;
};

// Center/scale/aspect parameterization: s is the box area in pixels²,
// r the width-over-height ratio.
struct StateBox {
    double x = 0.0;
    double y = 0.0;
    double s = 0.0;
    double r = 0.0;

    bool valid() const;

    friend bool operator==(const StateBox&, const StateBox&) = default;
};

// Throws std::invalid_argument on degenerate input (zero width or height).
StateBox corner_to_state(const CornerBox& b);

// Inverse of corner_to_state. Throws std::invalid_argument when s or r is
// not strictly positive.
CornerBox state_to_corner(const StateBox& s);

// Intersection over union in [0, 1]; 0 for disjoint or merely touching boxes.
double iou(const CornerBox& a, const CornerBox& b);

}  // namespace nearfar
