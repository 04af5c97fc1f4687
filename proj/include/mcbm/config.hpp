#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mcbm/background.hpp"
#include "mcbm/ja.hpp"
#include "mcbm/moments.hpp"
#include "mcbm/transform.hpp"

namespace mcbm {

struct PipelineConfig {
  TransformKind kind = TransformKind::affine;
  double lambda = 0.9;
  double beta = 0.35;
  double alpha = 0.3;
  double s = 0.05;
  double pad = 3.0;
  int batch_size = 8;
  int epochs_affine = 200;
  int epochs_homography = 100;
  double step_size = 0.05;
  double homography_step_size = 0.0125;
  int n_thresholds = 100;
  std::uint64_t seed = 0;
  double coverage_floor = 0.01;
  bool accumulate = true;
  bool accumulate_post_step = false;
  bool mask_weighted_moments = false;
  int novel_iterations = 150;
  int snapshot_every = 0;  // write the alignment target every K epochs; 0 disables
  int threads = 0;         // 0 = hardware concurrency
};

/// Sets one field from its textual value. Throws ArgumentError for unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key = value` lines; blank lines and lines starting with '#' are ignored.
void load_config_file(const std::filesystem::path& path, PipelineConfig& cfg);

/// Every field as `key = value` lines, loadable by load_config_file.
std::string to_config_text(const PipelineConfig& cfg);

JaConfig to_ja_config(const PipelineConfig& cfg);
MomentOptions to_moment_options(const PipelineConfig& cfg);
NovelFrameConfig to_novel_config(const PipelineConfig& cfg);

}  // namespace mcbm
