#pragma once

#include <cstdint>
#include <vector>

namespace ssdm {

// Per-pixel class indices, row major. 255 is reserved as the conventional
// ignore value.
struct LabelMap {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint8_t> values;

  int64_t numel() const { return height * width; }
  uint8_t at(int64_t y, int64_t x) const { return values[static_cast<size_t>(y * width + x)]; }
  uint8_t& at(int64_t y, int64_t x) { return values[static_cast<size_t>(y * width + x)]; }

  static LabelMap zeros(int64_t h, int64_t w) {
    return LabelMap{h, w, std::vector<uint8_t>(static_cast<size_t>(h * w), 0)};
  }
};

constexpr int kIgnoreIndex = 255;

}  // namespace ssdm
