#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mcbm/eval.hpp"
#include "mcbm/image.hpp"
#include "mcbm/transform.hpp"

namespace mcbm {

/// Smooth random camera walk plus an optional moving foreground square.
struct SynthSpec {
  int frame_height = 64;
  int frame_width = 64;
  int n_frames = 40;
  double max_translation = 20.0;   // pixels, per axis
  double max_rotation_deg = 10.0;  // about the frame center
  double max_log_scale = 0.0;      // |log s|
  int walk_components = 3;         // sinusoids per motion channel
  bool integer_translation = false;
  bool foreground = true;
  int fg_size = 12;
  double fg_travel = 2.4;  // horizontal path length of the square, in frame widths
  std::uint64_t seed = 1;
};

struct SynthData {
  Image panorama;
  int origin_x = 0;  // panorama position of the frame origin under the identity
  int origin_y = 0;
  std::vector<Frame> frames;            // with foreground
  std::vector<Frame> clean;             // background only
  std::vector<Annotation> annotations;  // 1 where the square covers the frame
  std::vector<TransformParams> truth;   // affine, frame coords -> reference coords
};

/// Procedural C-channel texture in [0.05, 0.95]: Gaussian blobs over a few low-frequency waves.
Image make_panorama(int size, int channels, std::uint64_t seed);

/// Frame n samples the panorama at T*_n(x') + origin. Throws ArgumentError if any frame
/// corner leaves the panorama.
SynthData synthesize(const Image& panorama, const SynthSpec& spec);

/// frames/, clean/, annotations/ image directories plus truth.csv.
void write_synth(const std::filesystem::path& dir, const SynthData& data);

}  // namespace mcbm
