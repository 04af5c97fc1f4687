#include "mcbm/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mcbm/error.hpp"

namespace mcbm::io {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_image_file(const fs::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Frame from_interleaved(const std::vector<unsigned char>& buf, int channels, int height, int width) {
  Frame f(channels, height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        f.at(c, y, x) = buf[(static_cast<std::size_t>(y) * width + x) * channels + c] / 255.0;
      }
    }
  }
  return f;
}

std::vector<unsigned char> to_interleaved(const Image& img) {
  std::vector<unsigned char> buf(img.data.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        buf[(static_cast<std::size_t>(y) * img.width + x) * img.channels + c] = to_byte(img.at(c, y, x));
      }
    }
  }
  return buf;
}

Frame read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ArgumentError("cannot read PNG '" + path.string() + "': " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ArgumentError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  return from_interleaved(buf, channels, static_cast<int>(image.height), static_cast<int>(image.width));
}

// Skips whitespace and '#' comments between PNM header tokens.
int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int v = 0;
  if (!(in >> v)) throw ArgumentError("malformed PNM header");
  return v;
}

Frame read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw ArgumentError("'" + path.string() + "' is not a binary PGM/PPM file");
  }
  const int channels = magic[1] == '6' ? 3 : 1;
  const int width = read_pnm_int(in);
  const int height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw ArgumentError("'" + path.string() + "': only 8-bit PGM/PPM is supported");
  }
  in.get();  // single whitespace before the raster
  std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw ArgumentError("'" + path.string() + "': truncated raster");
  return from_interleaved(buf, channels, height, width);
}

void write_le_doubles(std::ostream& out, const std::vector<double>& v) {
  for (double d : v) {
    auto bits = std::bit_cast<std::uint64_t>(d);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

void read_le_doubles(std::istream& in, double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    dst[i] = std::bit_cast<double>(bits);
  }
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("'" + path.string() + "': bad number '" + s + "'");
  }
}

}  // namespace

// Shortest decimal that parses back to the same double.
std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Frame read_image(const fs::path& path) {
  if (!fs::exists(path)) throw ArgumentError("missing image '" + path.string() + "'");
  const std::string ext = lower(path.extension().string());
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
  throw ArgumentError("unsupported image format '" + path.string() + "'");
}

void write_png(const fs::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw ArgumentError("write_png: need 1 or 3 channels");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::vector<unsigned char> buf = to_interleaved(img);
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw ArgumentError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

void write_pnm(const fs::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw ArgumentError("write_pnm: need 1 or 3 channels");
  auto out = open_out(path, std::ios::binary);
  out << (img.channels == 3 ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n255\n";
  const std::vector<unsigned char> buf = to_interleaved(img);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ArgumentError("not a directory: '" + dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ArgumentError("no image files in '" + dir.string() + "'");
  return files;
}

std::vector<Frame> read_frames(const fs::path& dir) {
  std::vector<Frame> frames;
  for (const auto& p : list_images(dir)) frames.push_back(read_image(p));
  check_sequence(frames);
  return frames;
}

std::string frame_filename(const std::string& prefix, std::size_t index, std::size_t total) {
  const int digits = std::max<int>(4, static_cast<int>(std::to_string(total).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", digits, index);
  return prefix + buf + ".png";
}

void write_frames(const fs::path& dir, const std::vector<Frame>& frames, const std::string& prefix) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) write_png(dir / frame_filename(prefix, i, frames.size()), frames[i]);
}

Annotation read_annotation(const fs::path& path) {
  const Frame f = read_image(path);
  Annotation a(f.height, f.width);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) a.at(y, x) = f.at(0, y, x) > 0.0 ? 1 : 0;
  }
  return a;
}

std::vector<Annotation> read_annotations(const fs::path& dir) {
  std::vector<Annotation> out;
  for (const auto& p : list_images(dir)) out.push_back(read_annotation(p));
  return out;
}

void write_annotation(const fs::path& path, const Annotation& a) {
  Image img(1, a.height, a.width);
  for (std::size_t i = 0; i < a.data.size(); ++i) img.data[i] = a.data[i] ? 1.0 : 0.0;
  write_png(path, img);
}

void write_transforms(const fs::path& path, const std::vector<TransformParams>& params) {
  auto out = open_out(path);
  const int d = params.empty() ? 6 : params.front().dim();
  out << "frame_index,kind";
  for (int k = 0; k < d; ++k) out << ",theta_" << k;
  out << ",m11,m12,m13,m21,m22,m23,m31,m32,m33\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.dim() != d) throw ArgumentError("write_transforms: mixed transform kinds");
    out << i << "," << to_string(p.kind);
    for (int k = 0; k < d; ++k) out << "," << format_double(p.theta[k]);
    const Matrix3 m = realize(p);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << "," << format_double(m(r, c));
    }
    out << "\n";
  }
}

std::vector<TransformParams> read_transforms(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open transforms file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("'" + path.string() + "': empty transforms file");
  const auto header = split_csv(line);
  if (header.size() != 17 && header.size() != 19) {
    throw ArgumentError("'" + path.string() + "': expected 17 or 19 columns, got " + std::to_string(header.size()));
  }
  std::vector<TransformParams> out;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw ArgumentError("'" + path.string() + "': ragged row");
    const auto index = static_cast<std::size_t>(parse_double(cells[0], path));
    if (index != out.size()) throw ArgumentError("'" + path.string() + "': frame indices must be 0,1,2,...");
    TransformParams p = TransformParams::identity(parse_transform_kind(cells[1]));
    if (static_cast<std::size_t>(p.dim()) + 11 != cells.size()) {
      throw ArgumentError("'" + path.string() + "': column count does not match kind " + cells[1]);
    }
    for (int k = 0; k < p.dim(); ++k) p.theta[k] = parse_double(cells[2 + k], path);
    Matrix3 m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m(r, c) = parse_double(cells[2 + p.dim() + 3 * r + c], path);
    }
    if (p.kind == TransformKind::homography) {
      // The stored matrix carries the frozen warm-start base.
      p.base = m * inverse(matrix_exp(homography_generator(std::span<const double>(p.theta.data(), 8))));
    } else if ((realize(p) - m).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
      throw ArgumentError("'" + path.string() + "': matrix of frame " + cells[0] + " does not match its theta");
    }
    out.push_back(p);
  }
  return out;
}

void write_epoch_log(const fs::path& path, const std::vector<EpochRecord>& history) {
  auto out = open_out(path);
  out << "epoch,stage,loss,mean_coverage,dropped_frames\n";
  for (const auto& r : history) {
    out << r.epoch << "," << to_string(r.stage) << "," << format_double(r.loss) << ","
        << format_double(r.mean_coverage) << "," << r.dropped_frames << "\n";
  }
}

void write_moments(const fs::path& path, const PanoramicMoments& m) {
  auto out = open_out(path, std::ios::binary);
  out << "MCBM-MOM v1 " << m.channels() << " " << m.height() << " " << m.width() << " "
      << format_double(m.alpha) << "\n";
  write_le_doubles(out, m.mean.data);
  write_le_doubles(out, m.var.data);
  std::vector<double> counts(m.count.begin(), m.count.end());
  write_le_doubles(out, counts);
}

PanoramicMoments read_moments(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open moments file '" + path.string() + "'");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version;
  int c = 0, h = 0, w = 0;
  double alpha = 0.0;
  if (!(hs >> magic >> version >> c >> h >> w >> alpha) || magic != "MCBM-MOM" || version != "v1" || c <= 0 ||
      h <= 0 || w <= 0) {
    throw ArgumentError("'" + path.string() + "': not an MCBM-MOM v1 file");
  }
  PanoramicMoments m;
  m.alpha = alpha;
  m.mean = Image(c, h, w);
  m.var = Image(c, h, w);
  read_le_doubles(in, m.mean.data.data(), m.mean.data.size());
  read_le_doubles(in, m.var.data.data(), m.var.data.size());
  std::vector<double> counts(static_cast<std::size_t>(h) * w);
  read_le_doubles(in, counts.data(), counts.size());
  if (!in) throw ArgumentError("'" + path.string() + "': truncated moments file");
  m.count.resize(counts.size());
  std::transform(counts.begin(), counts.end(), m.count.begin(), [](double v) { return static_cast<int>(v); });
  return m;
}

void write_roc(const fs::path& path, const RocCurve& curve) {
  auto out = open_out(path);
  out << "alpha,fpr,tpr\n";
  for (const auto& p : curve.points) {
    out << format_double(p.threshold) << "," << format_double(p.fpr) << "," << format_double(p.tpr) << "\n";
  }
}

}  // namespace mcbm::io
