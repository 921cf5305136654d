#pragma once

#include <cstdint>
#include <vector>

namespace tabal {

// Axis-aligned box over continuous pixel coordinates. Closed intervals on
// both axes; area = (x_max - x_min) * (y_max - y_min).
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool valid() const;
};

// Row-major bit mask of width x height pixels, packed into 64-bit words.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    bool test(int x, int y) const;
    void set(int x, int y, bool value = true);

    // Number of set bits.
    int64_t count() const;
    bool empty() const { return count() == 0; }

    bool same_shape(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool operator==(const BinaryMask& other) const = default;

    const std::vector<uint64_t>& words() const { return words_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint64_t> words_;

    friend double mask_iou(const BinaryMask&, const BinaryMask&);
};

// |a ∩ b| / |a ∪ b| analytically. 0 when the union has zero area.
double box_iou(const BoundingBox& a, const BoundingBox& b);

// popcount(a AND b) / popcount(a OR b). Two empty masks give 1.0, so a blank
// page has mask ambiguity 1 - 1 = 0. Throws std::invalid_argument on shape
// mismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Mask with a bit set iff the pixel center (i + 0.5, j + 0.5) lies inside at
// least one box. Boxes are clipped to image bounds.
BinaryMask rasterize_boxes(const std::vector<BoundingBox>& boxes, int width, int height);

}  // namespace tabal
