#include "tabal/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tabal {

bool BoundingBox::valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("BinaryMask: dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    const size_t bits = static_cast<size_t>(width) * static_cast<size_t>(height);
    words_.assign((bits + 63) / 64, 0);
}

bool BinaryMask::test(int x, int y) const {
    const size_t i = static_cast<size_t>(y) * width_ + x;
    return (words_[i >> 6] >> (i & 63)) & 1;
}

void BinaryMask::set(int x, int y, bool value) {
    const size_t i = static_cast<size_t>(y) * width_ + x;
    if (value) {
        words_[i >> 6] |= uint64_t{1} << (i & 63);
    } else {
        words_[i >> 6] &= ~(uint64_t{1} << (i & 63));
    }
}

int64_t BinaryMask::count() const {
    int64_t n = 0;
    for (uint64_t w : words_) n += std::popcount(w);
    return n;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(
            "mask_iou: dimension mismatch (" + std::to_string(a.width()) + "x" +
            std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
            std::to_string(b.height()) + ")");
    }
    int64_t inter = 0;
    int64_t uni = 0;
    for (size_t i = 0; i < a.words_.size(); ++i) {
        inter += std::popcount(a.words_[i] & b.words_[i]);
        uni += std::popcount(a.words_[i] | b.words_[i]);
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask rasterize_boxes(const std::vector<BoundingBox>& boxes, int width, int height) {
    BinaryMask mask(width, height);
    for (const auto& box : boxes) {
        // Pixel center c = i + 0.5 lies in [lo, hi] iff i in [ceil(lo - 0.5), floor(hi - 0.5)].
        int x0 = static_cast<int>(std::ceil(box.x_min - 0.5));
        int x1 = static_cast<int>(std::floor(box.x_max - 0.5));
        int y0 = static_cast<int>(std::ceil(box.y_min - 0.5));
        int y1 = static_cast<int>(std::floor(box.y_max - 0.5));
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, width - 1);
        y1 = std::min(y1, height - 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                mask.set(x, y);
            }
        }
    }
    return mask;
}

}  // namespace tabal
