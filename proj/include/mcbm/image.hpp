#pragma once

#include <cstddef>
#include <vector>

namespace mcbm {

/// Multi-channel real image, planar layout: data[(c * height + y) * width + x].
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  double& at(int c, int y, int x) { return data[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data[index(c, y, x)]; }

  bool same_shape(const Image& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  bool empty() const { return data.empty(); }
};

// Frames are images on the h x w frame domain with values in [0,1].
using Frame = Image;

/// Single-channel binary map (annotations, validity flags).
struct BinaryMap {
  int height = 0;
  int width = 0;
  std::vector<unsigned char> data;

  BinaryMap() = default;
  BinaryMap(int h, int w, unsigned char fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}
  unsigned char& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  unsigned char at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;
};

// Throws ArgumentError unless every value is finite and inside [0,1].
void check_frame(const Frame& f);
// Throws ArgumentError unless all frames share (C, h, w) and there is at least one.
void check_sequence(const std::vector<Frame>& frames);

}  // namespace mcbm
