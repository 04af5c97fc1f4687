#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcbm/eval.hpp"
#include "mcbm/image.hpp"
#include "mcbm/ja.hpp"
#include "mcbm/moments.hpp"
#include "mcbm/transform.hpp"

namespace mcbm::io {

namespace fs = std::filesystem;

/// 8-bit grayscale or RGB PNG, or binary PGM/PPM (P5/P6). Values are mapped to [0,1] by /255.
/// Alpha channels are dropped; gray+alpha becomes gray.
Frame read_image(const fs::path& path);
/// Writes an 8-bit PNG (1 or 3 channels); values are clamped to [0,1] and rounded.
void write_png(const fs::path& path, const Image& img);
void write_pnm(const fs::path& path, const Image& img);

/// Image files of a directory in lexicographic filename order.
std::vector<fs::path> list_images(const fs::path& dir);
std::vector<Frame> read_frames(const fs::path& dir);
void write_frames(const fs::path& dir, const std::vector<Frame>& frames, const std::string& prefix = "frame_");

/// Nonzero pixels of the first channel become foreground.
Annotation read_annotation(const fs::path& path);
std::vector<Annotation> read_annotations(const fs::path& dir);
void write_annotation(const fs::path& path, const Annotation& a);

std::string frame_filename(const std::string& prefix, std::size_t index, std::size_t total);

/// CSV: frame_index,kind,theta_0..theta_{d-1},m11..m33 with round-trip precision.
void write_transforms(const fs::path& path, const std::vector<TransformParams>& params);
std::vector<TransformParams> read_transforms(const fs::path& path);

/// CSV: epoch,stage,loss,mean_coverage,dropped_frames.
void write_epoch_log(const fs::path& path, const std::vector<EpochRecord>& history);

/// Text header "MCBM-MOM v1 C H W alpha\n" then little-endian float64 blocks
/// mean (C*H*W), var (C*H*W), count (H*W).
void write_moments(const fs::path& path, const PanoramicMoments& m);
PanoramicMoments read_moments(const fs::path& path);

void write_roc(const fs::path& path, const RocCurve& curve);

std::string format_double(double v);

}  // namespace mcbm::io
