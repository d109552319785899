#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/imagecore.hpp"

namespace adforge {

struct FrameRate {
  int num = 30;
  int den = 1;
  bool operator==(const FrameRate&) const = default;
};

// Always 4:4:4 planar, full-range BT.601 YCbCr.
struct VideoStream {
  int width = 0;
  int height = 0;
  FrameRate frame_rate;
  std::size_t frame_count = 0;
};

// Sequential Y4M reader. Accepts C444 only.
class Y4mReader {
 public:
  // Throws MalformedHeader, UnsupportedColorSpace, IoError.
  explicit Y4mReader(const std::filesystem::path& path);

  const VideoStream& stream() const noexcept { return stream_; }

  // Next frame, or nullopt at end of file. Throws TruncatedFrame.
  std::optional<Frame> next();
  void rewind();

 private:
  std::size_t count_frames();

  std::ifstream in_;
  std::streampos first_frame_;
  VideoStream stream_;
  std::vector<unsigned char> planes_;
};

class Y4mWriter {
 public:
  Y4mWriter(const std::filesystem::path& path, int width, int height, FrameRate rate);

  // Throws DimensionMismatch.
  void write(const Frame& frame);

 private:
  std::ofstream out_;
  int width_;
  int height_;
  std::vector<unsigned char> planes_;
};

struct Video {
  VideoStream stream;
  std::vector<Frame> frames;
};

Video read_y4m(const std::filesystem::path& path);
void write_y4m(const std::filesystem::path& path, const VideoStream& params, std::span<const Frame> frames);

std::string y4m_header(int width, int height, FrameRate rate);

// 8-bit per channel, round half up.
std::uint8_t quantize(double v) noexcept;

// 8-bit RGB or RGBA PNG; alpha is dropped. Throws UnsupportedPngType.
Frame read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Frame& frame);
std::vector<unsigned char> encode_png(const Frame& frame);

// `pattern` holds a single printf integer placeholder such as %06d. Frames
// are returned in index order; a gap raises MissingFrameIndex.
std::vector<Frame> read_png_sequence(const std::filesystem::path& dir, const std::string& pattern);
void write_png_sequence(const std::filesystem::path& dir, const std::string& pattern, std::span<const Frame> frames);

struct CornerFile {
  int frame = 0;
  Quad quad;
};

// {"frame": n, "corners": [[x,y] x4]} in TL, TR, BR, BL order. Throws
// SchemaViolation, NotConvex.
CornerFile read_corners_json(const std::filesystem::path& path);
CornerFile parse_corners_json(const std::string& text);
void write_corners_json(const std::filesystem::path& path, int frame, const Quad& quad);
std::string corners_json(int frame, const Quad& quad);

}  // namespace adforge
