#include "nearfar/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nearfar {

bool CornerBox::valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x2 > x1 && y2 > y1;
}

bool StateBox::valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(s) && std::isfinite(r) &&
           s > 0.0 && r > 0.0;
}

StateBox corner_to_state(const CornerBox& b) {
    if (!b.valid()) {
        throw std::invalid_argument("corner_to_state: degenerate or non-finite box");
    }
    const double w = b.width();
    const double h = b.height();
    return StateBox{(b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0, w * h, w / h};
}

CornerBox state_to_corner(const StateBox& s) {
    if (!s.valid()) {
        throw std::invalid_argument("state_to_corner: s and r must be positive and finite");
    }
    const double w = std::sqrt(s.s * s.r);
    const double h = std::sqrt(s.s / s.r);
    return CornerBox{s.x - w / 2.0, s.y - h / 2.0, s.x + w / 2.0, s.y + h / 2.0};
}

double iou(const CornerBox& a, const CornerBox& b) {
    if (!a.valid() || !b.valid()) {
        throw std::invalid_argument("iou: invalid box");
    }
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

}  // namespace nearfar
