#include "mcbm/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcbm/error.hpp"

namespace mcbm {

std::size_t BinaryMap::count() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](unsigned char v) { return v != 0; }));
}

void check_frame(const Frame& f) {
  if (f.channels <= 0 || f.height <= 0 || f.width <= 0) throw ArgumentError("frame has empty shape");
  if (f.data.size() != static_cast<std::size_t>(f.channels) * f.plane_size()) {
    throw ArgumentError("frame data size does not match its shape");
  }
  for (double v : f.data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw ArgumentError("frame values must be finite and in [0,1]");
  }
}

void check_sequence(const std::vector<Frame>& frames) {
  if (frames.empty()) throw ArgumentError("empty frame sequence");
  for (const auto& f : frames) {
    check_frame(f);
    if (!f.same_shape(frames.front())) {
      throw ArgumentError("frames differ in shape: " + std::to_string(f.channels) + "x" +
                          std::to_string(f.height) + "x" + std::to_string(f.width));
    }
  }
}

}  // namespace mcbm
