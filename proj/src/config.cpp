#include "mcbm/config.hpp"

#include <fstream>
#include <sstream>

#include "mcbm/error.hpp"
#include "mcbm/io.hpp"

namespace mcbm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ArgumentError("config: '" + key + "' expects a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ArgumentError("config: '" + key + "' expects an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ArgumentError("config: '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace

void apply_setting(PipelineConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (key == "kind") cfg.kind = parse_transform_kind(v);
  else if (key == "lambda") cfg.lambda = to_double(key, v);
  else if (key == "beta") cfg.beta = to_double(key, v);
  else if (key == "alpha") cfg.alpha = to_double(key, v);
  else if (key == "s") cfg.s = to_double(key, v);
  else if (key == "pad") cfg.pad = to_double(key, v);
  else if (key == "batch_size") cfg.batch_size = static_cast<int>(to_int(key, v));
  else if (key == "epochs_affine") cfg.epochs_affine = static_cast<int>(to_int(key, v));
  else if (key == "epochs_homography") cfg.epochs_homography = static_cast<int>(to_int(key, v));
  else if (key == "step_size") cfg.step_size = to_double(key, v);
  else if (key == "homography_step_size") cfg.homography_step_size = to_double(key, v);
  else if (key == "n_thresholds") cfg.n_thresholds = static_cast<int>(to_int(key, v));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "coverage_floor") cfg.coverage_floor = to_double(key, v);
  else if (key == "accumulate") cfg.accumulate = to_bool(key, v);
  else if (key == "accumulate_post_step") cfg.accumulate_post_step = to_bool(key, v);
  else if (key == "mask_weighted_moments") cfg.mask_weighted_moments = to_bool(key, v);
  else if (key == "novel_iterations") cfg.novel_iterations = static_cast<int>(to_int(key, v));
  else if (key == "snapshot_every") cfg.snapshot_every = static_cast<int>(to_int(key, v));
  else if (key == "threads") cfg.threads = static_cast<int>(to_int(key, v));
  else throw ArgumentError("config: unknown key '" + key + "'");
}

void load_config_file(const std::filesystem::path& path, PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file '" + path.string() + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_setting(cfg, t.substr(0, eq), t.substr(eq + 1));
  }
}

std::string to_config_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "kind = " << to_string(cfg.kind) << "\n"
      << "lambda = " << io::format_double(cfg.lambda) << "\n"
      << "beta = " << io::format_double(cfg.beta) << "\n"
      << "alpha = " << io::format_double(cfg.alpha) << "\n"
      << "s = " << io::format_double(cfg.s) << "\n"
      << "pad = " << io::format_double(cfg.pad) << "\n"
      << "batch_size = " << cfg.batch_size << "\n"
      << "epochs_affine = " << cfg.epochs_affine << "\n"
      << "epochs_homography = " << cfg.epochs_homography << "\n"
      << "step_size = " << io::format_double(cfg.step_size) << "\n"
      << "homography_step_size = " << io::format_double(cfg.homography_step_size) << "\n"
      << "n_thresholds = " << cfg.n_thresholds << "\n"
      << "seed = " << cfg.seed << "\n"
      << "coverage_floor = " << io::format_double(cfg.coverage_floor) << "\n"
      << "accumulate = " << b(cfg.accumulate) << "\n"
      << "accumulate_post_step = " << b(cfg.accumulate_post_step) << "\n"
      << "mask_weighted_moments = " << b(cfg.mask_weighted_moments) << "\n"
      << "novel_iterations = " << cfg.novel_iterations << "\n"
      << "snapshot_every = " << cfg.snapshot_every << "\n"
      << "threads = " << cfg.threads << "\n";
  return out.str();
}

JaConfig to_ja_config(const PipelineConfig& cfg) {
  JaConfig ja;
  ja.batch_size = cfg.batch_size;
  ja.epochs_affine = cfg.epochs_affine;
  ja.epochs_homography = cfg.kind == TransformKind::homography ? cfg.epochs_homography : 0;
  ja.step_size = cfg.step_size;
  ja.homography_step_size = cfg.homography_step_size;
  ja.beta = cfg.beta;
  ja.lambda = cfg.lambda;
  ja.coverage_floor = cfg.coverage_floor;
  ja.pad = cfg.pad;
  ja.seed = cfg.seed;
  ja.accumulate = cfg.accumulate;
  ja.accumulate_post_step = cfg.accumulate_post_step;
  ja.threads = cfg.threads;
  return ja;
}

MomentOptions to_moment_options(const PipelineConfig& cfg) {
  MomentOptions m;
  m.alpha = cfg.alpha;
  m.mask_weighted = cfg.mask_weighted_moments;
  m.threads = cfg.threads;
  return m;
}

NovelFrameConfig to_novel_config(const PipelineConfig& cfg) {
  NovelFrameConfig n;
  n.kind = cfg.kind;
  n.beta = cfg.beta;
  n.coverage_floor = cfg.coverage_floor;
  n.step_size = cfg.step_size;
  n.homography_step_size = cfg.homography_step_size;
  n.iterations = cfg.novel_iterations;
  n.threads = cfg.threads;
  return n;
}

}  // namespace mcbm
