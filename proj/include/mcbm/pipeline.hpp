#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcbm/background.hpp"
#include "mcbm/config.hpp"
#include "mcbm/eval.hpp"
#include "mcbm/image.hpp"
#include "mcbm/ja.hpp"
#include "mcbm/moments.hpp"

namespace mcbm {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

/// Fits the transforms and writes transforms.csv, epochs.csv and (optionally) target
/// snapshots under out_dir.
AlignmentState align_stage(const std::vector<Frame>& frames, const PipelineConfig& cfg, const fs::path& out_dir);

/// Warps every frame with its transform, computes the trimmed moments and writes
/// moments.bin and mu_r.png under out_dir.
PanoramicMoments moments_stage(const std::vector<Frame>& frames, const std::vector<TransformParams>& params,
                               const PipelineConfig& cfg, const fs::path& out_dir);

/// Per-frame backgrounds into out_dir/backgrounds plus residuals.csv.
std::vector<Frame> background_stage(const std::vector<Frame>& frames, const std::vector<TransformParams>& params,
                                    const PanoramicMoments& moments, const PipelineConfig& cfg,
                                    const fs::path& out_dir);

struct EvalOutcome {
  RocCurve curve;
  bool degenerate = false;
  std::string reason;
};

/// ROC of the scaled background error against annotations; writes roc.csv and auc.csv.
/// A constant error field or a single-class annotation set yields a degenerate outcome.
EvalOutcome eval_stage(const std::vector<Frame>& frames, const std::vector<Frame>& backgrounds,
                       const std::vector<Annotation>& annotations, const PipelineConfig& cfg,
                       const fs::path& out_dir);

struct RunOptions {
  fs::path frames_dir;
  fs::path out_dir;
  std::optional<fs::path> annotations_dir;
};

/// align -> moments -> background -> (eval), plus manifest.txt.
void run_pipeline(const RunOptions& opt, const PipelineConfig& cfg);

}  // namespace mcbm
