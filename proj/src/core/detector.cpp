#include "core/detector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <vector>

#include "core/error.hpp"

namespace adforge {

namespace {

struct PgmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

// Reads the next header integer, skipping whitespace and `#` comments.
int read_header_int(const std::vector<unsigned char>& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    throw Error(ErrorCode::MalformedPgm, "expected an integer in the PGM header");
  }
  long value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000) throw Error(ErrorCode::MalformedPgm, "header value out of range");
    ++pos;
  }
  return static_cast<int>(value);
}

PgmHeader parse_header(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::MalformedPgm, "missing P5 magic");
  }
  std::size_t pos = 2;
  PgmHeader h;
  h.width = read_header_int(bytes, pos);
  h.height = read_header_int(bytes, pos);
  h.maxval = read_header_int(bytes, pos);
  if (h.width < 1 || h.height < 1) throw Error(ErrorCode::MalformedPgm, "bad dimensions");
  if (h.maxval != 255 && h.maxval != 65535) {
    throw Error(ErrorCode::MalformedPgm, "unsupported maxval " + std::to_string(h.maxval));
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::MalformedPgm, "header must end with one whitespace byte");
  }
  h.data_offset = pos + 1;
  return h;
}

Heatmap chroma_heatmap(const ChromaBaseline& c, const Frame& frame) {
  if (!(c.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "baseline sigma must be positive");
  Heatmap map(frame.width(), frame.height());
  const double denom = 2.0 * c.sigma * c.sigma;
  const auto& src = frame.data();
  auto& dst = map.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double dr = src[3 * i] - c.reference[0];
    const double dg = src[3 * i + 1] - c.reference[1];
    const double db = src[3 * i + 2] - c.reference[2];
    dst[i] = std::exp(-(dr * dr + dg * dg + db * db) / denom);
  }
  return map;
}

}  // namespace

std::filesystem::path heatmap_path(const HeatmapFiles& files, int frame_index) {
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "_%06d.pgm", frame_index);
  return files.dir / (files.stem + suffix);
}

Heatmap localize(const DetectorSource& source, int frame_index, const Frame& frame) {
  if (const auto* files = std::get_if<HeatmapFiles>(&source)) {
    const std::filesystem::path path = heatmap_path(*files, frame_index);
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::MissingHeatmap, "no heatmap at " + path.string());
    }
    Heatmap map = load_heatmap_pgm(path);
    if (map.width() != frame.width() || map.height() != frame.height()) {
      throw Error(ErrorCode::DimensionMismatch, "heatmap " + path.string() + " does not match the frame size");
    }
    return map;
  }
  return chroma_heatmap(std::get<ChromaBaseline>(source), frame);
}

double recognize(const DetectorSource& source, int frame_index, const Frame& frame) {
  const Heatmap map = localize(source, frame_index, frame);
  return *std::max_element(map.data().begin(), map.data().end());
}

Heatmap load_heatmap_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const PgmHeader h = parse_header(bytes);

  const std::size_t sample_bytes = h.maxval == 65535 ? 2 : 1;
  const std::size_t needed = static_cast<std::size_t>(h.width) * h.height * sample_bytes;
  if (bytes.size() - h.data_offset < needed) {
    throw Error(ErrorCode::TruncatedData, path.string() + " ends before the raster does");
  }
  Heatmap map(h.width, h.height);
  auto& dst = map.data();
  const unsigned char* p = bytes.data() + h.data_offset;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const unsigned value = sample_bytes == 2 ? (unsigned{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
    dst[i] = static_cast<double>(value) / h.maxval;
  }
  return map;
}

void write_heatmap_pgm(const std::filesystem::path& path, const Heatmap& heatmap, int maxval) {
  if (maxval != 255 && maxval != 65535) throw Error(ErrorCode::InvalidArgument, "maxval must be 255 or 65535");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "P5\n" << heatmap.width() << ' ' << heatmap.height() << '\n' << maxval << '\n';
  std::vector<unsigned char> raster;
  raster.reserve(heatmap.pixel_count() * (maxval == 65535 ? 2 : 1));
  for (double v : heatmap.data()) {
    const auto q = static_cast<unsigned>(std::floor(std::clamp(v, 0.0, 1.0) * maxval + 0.5));
    if (maxval == 65535) raster.push_back(static_cast<unsigned char>(q >> 8));
    raster.push_back(static_cast<unsigned char>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace adforge
