#include "core/videoio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <json.hpp>
#include <regex>
#include <sstream>

#include "core/error.hpp"

namespace adforge {

namespace {

using nlohmann::json;

FrameRate parse_rate(const std::string& token) {
  const auto colon = token.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::MalformedHeader, "frame rate needs num:den");
  try {
    FrameRate r{std::stoi(token.substr(0, colon)), std::stoi(token.substr(colon + 1))};
    if (r.num < 1 || r.den < 1) throw Error(ErrorCode::MalformedHeader, "frame rate must be positive");
    return r;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::MalformedHeader, "bad frame rate " + token);
  }
}

int parse_dimension(const std::string& token) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size() || v < 1) throw std::invalid_argument(token);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::MalformedHeader, "bad dimension " + token);
  }
}

void ycbcr_to_rgb(const unsigned char* y, const unsigned char* cb, const unsigned char* cr, Frame& frame) {
  const std::size_t n = frame.pixel_count();
  auto& d = frame.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double luma = y[i] / 255.0;
    const double u = (cb[i] - 128.0) / 255.0;
    const double v = (cr[i] - 128.0) / 255.0;
    d[3 * i] = std::clamp(luma + 1.402 * v, 0.0, 1.0);
    d[3 * i + 1] = std::clamp(luma - 0.344136 * u - 0.714136 * v, 0.0, 1.0);
    d[3 * i + 2] = std::clamp(luma + 1.772 * u, 0.0, 1.0);
  }
}

void rgb_to_ycbcr(const Frame& frame, unsigned char* y, unsigned char* cb, unsigned char* cr) {
  const std::size_t n = frame.pixel_count();
  const auto& d = frame.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = d[3 * i], g = d[3 * i + 1], b = d[3 * i + 2];
    y[i] = quantize(0.299 * r + 0.587 * g + 0.114 * b);
    cb[i] = quantize(128.0 / 255.0 - 0.168736 * r - 0.331264 * g + 0.5 * b);
    cr[i] = quantize(128.0 / 255.0 + 0.5 * r - 0.418688 * g - 0.081312 * b);
  }
}

std::vector<unsigned char> to_rgb8(const Frame& frame) {
  std::vector<unsigned char> rgb(frame.data().size());
  std::transform(frame.data().begin(), frame.data().end(), rgb.begin(), quantize);
  return rgb;
}

Frame frame_from_png(png_image& image, const std::string& what, auto&& finish) {
  const bool has_color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool is_linear = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  const bool is_mapped = (image.format & PNG_FORMAT_FLAG_COLORMAP) != 0;
  if (!has_color || is_linear || is_mapped) {
    png_image_free(&image);
    throw Error(ErrorCode::UnsupportedPngType, what + " is not 8-bit RGB or RGBA");
  }
  const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  const int channels = has_alpha ? 4 : 3;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!finish(buffer.data())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::IoError, what + ": " + msg);
  }
  Frame frame(static_cast<int>(image.width), static_cast<int>(image.height));
  auto& d = frame.data();
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) d[3 * i + c] = buffer[channels * i + c] / 255.0;
  }
  return frame;
}

// Turns a printf pattern with one integer conversion into a regex and a
// formatter.
struct SequencePattern {
  std::regex matcher;
  std::string printf_pattern;
};

SequencePattern compile_pattern(const std::string& pattern) {
  static const std::regex placeholder(R"(%0?\d*d)");
  std::smatch m;
  if (!std::regex_search(pattern, m, placeholder)) {
    throw Error(ErrorCode::InvalidArgument, "pattern needs one integer placeholder: " + pattern);
  }
  const std::string tail = m.suffix().str();
  if (std::regex_search(tail, placeholder)) {
    throw Error(ErrorCode::InvalidArgument, "pattern has more than one placeholder: " + pattern);
  }
  const auto escape = [](const std::string& s) {
    static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
    return std::regex_replace(s, special, R"(\$&)");
  };
  return {std::regex(escape(m.prefix().str()) + R"((\d+))" + escape(tail)), pattern};
}

std::string format_index(const std::string& pattern, int index) {
  const int n = std::snprintf(nullptr, 0, pattern.c_str(), index);
  std::string out(static_cast<std::size_t>(n) + 1, '\0');
  std::snprintf(out.data(), out.size(), pattern.c_str(), index);
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace

std::uint8_t quantize(double v) noexcept {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

std::string y4m_header(int width, int height, FrameRate rate) {
  std::ostringstream s;
  s << "YUV4MPEG2 W" << width << " H" << height << " F" << rate.num << ':' << rate.den << " Ip A1:1 C444\n";
  return s.str();
}

Y4mReader::Y4mReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in_, line) || line.rfind("YUV4MPEG2 ", 0) != 0) {
    throw Error(ErrorCode::MalformedHeader, path.string() + " does not start with a YUV4MPEG2 header");
  }
  std::istringstream tokens(line.substr(10));
  std::string tok;
  bool have_w = false, have_h = false, have_f = false;
  std::string colorspace = "420jpeg";  // format default when C is absent
  while (tokens >> tok) {
    const std::string value = tok.substr(1);
    switch (tok[0]) {
      case 'W': stream_.width = parse_dimension(value); have_w = true; break;
      case 'H': stream_.height = parse_dimension(value); have_h = true; break;
      case 'F': stream_.frame_rate = parse_rate(value); have_f = true; break;
      case 'C': colorspace = value; break;
      case 'I': case 'A': case 'X': break;
      default: throw Error(ErrorCode::MalformedHeader, "unknown header token " + tok);
    }
  }
  if (!have_w || !have_h || !have_f) {
    throw Error(ErrorCode::MalformedHeader, "header must carry W, H and F");
  }
  if (colorspace != "444") {
    throw Error(ErrorCode::UnsupportedColorSpace, "only C444 is supported, got C" + colorspace);
  }
  planes_.resize(static_cast<std::size_t>(stream_.width) * stream_.height * 3);
  first_frame_ = in_.tellg();
  stream_.frame_count = count_frames();
  rewind();
}

std::size_t Y4mReader::count_frames() {
  std::size_t count = 0;
  std::string line;
  while (std::getline(in_, line)) {
    if (line.rfind("FRAME", 0) != 0) throw Error(ErrorCode::MalformedHeader, "expected a FRAME marker");
    ++count;
    in_.seekg(static_cast<std::streamoff>(planes_.size()), std::ios::cur);
    if (!in_) break;
  }
  return count;
}

void Y4mReader::rewind() {
  in_.clear();
  in_.seekg(first_frame_);
}

std::optional<Frame> Y4mReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  if (line.rfind("FRAME", 0) != 0) throw Error(ErrorCode::MalformedHeader, "expected a FRAME marker");
  in_.read(reinterpret_cast<char*>(planes_.data()), static_cast<std::streamsize>(planes_.size()));
  if (in_.gcount() != static_cast<std::streamsize>(planes_.size())) {
    throw Error(ErrorCode::TruncatedFrame, "frame data ends early");
  }
  const std::size_t plane = planes_.size() / 3;
  Frame frame(stream_.width, stream_.height);
  ycbcr_to_rgb(planes_.data(), planes_.data() + plane, planes_.data() + 2 * plane, frame);
  return frame;
}

Y4mWriter::Y4mWriter(const std::filesystem::path& path, int width, int height, FrameRate rate)
    : out_(path, std::ios::binary), width_(width), height_(height),
      planes_(static_cast<std::size_t>(width) * height * 3) {
  if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (width < 1 || height < 1 || rate.num < 1 || rate.den < 1) {
    throw Error(ErrorCode::InvalidArgument, "bad stream parameters");
  }
  out_ << y4m_header(width, height, rate);
}

void Y4mWriter::write(const Frame& frame) {
  if (frame.width() != width_ || frame.height() != height_) {
    throw Error(ErrorCode::DimensionMismatch, "frame size differs from the stream header");
  }
  const std::size_t plane = planes_.size() / 3;
  rgb_to_ycbcr(frame, planes_.data(), planes_.data() + plane, planes_.data() + 2 * plane);
  out_ << "FRAME\n";
  out_.write(reinterpret_cast<const char*>(planes_.data()), static_cast<std::streamsize>(planes_.size()));
  if (!out_) throw Error(ErrorCode::IoError, "short write");
}

Video read_y4m(const std::filesystem::path& path) {
  Y4mReader reader(path);
  Video v{reader.stream(), {}};
  while (auto f = reader.next()) v.frames.push_back(std::move(*f));
  return v;
}

void write_y4m(const std::filesystem::path& path, const VideoStream& params, std::span<const Frame> frames) {
  for (const Frame& f : frames) {
    if (f.width() != params.width || f.height() != params.height) {
      throw Error(ErrorCode::DimensionMismatch, "frame size differs from the stream header");
    }
  }
  Y4mWriter writer(path, params.width, params.height, params.frame_rate);
  for (const Frame& f : frames) writer.write(f);
}

Frame read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::IoError, path.string() + ": " + msg);
  }
  return frame_from_png(image, path.string(), [&](unsigned char* buf) {
    return png_image_finish_read(&image, nullptr, buf, 0, nullptr) != 0;
  });
}

std::vector<unsigned char> encode_png(const Frame& frame) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_RGB;
  const std::vector<unsigned char> rgb = to_rgb8(frame);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("png sizing failed: ") + image.message);
  }
  std::vector<unsigned char> bytes(size);
  if (!png_image_write_to_memory(&image, bytes.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("png encoding failed: ") + image.message);
  }
  bytes.resize(size);
  return bytes;
}

void write_png(const std::filesystem::path& path, const Frame& frame) {
  const std::vector<unsigned char> bytes = encode_png(frame);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::vector<Frame> read_png_sequence(const std::filesystem::path& dir, const std::string& pattern) {
  const SequencePattern p = compile_pattern(pattern);
  std::map<int, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (entry.is_regular_file() && std::regex_match(name, m, p.matcher)) {
      files.emplace(std::stoi(m[1].str()), entry.path());
    }
  }
  std::vector<Frame> frames;
  int expected = files.empty() ? 0 : files.begin()->first;
  for (const auto& [index, path] : files) {
    if (index != expected) {
      throw Error(ErrorCode::MissingFrameIndex, "no file for frame index " + std::to_string(expected));
    }
    frames.push_back(read_png(path));
    ++expected;
  }
  return frames;
}

void write_png_sequence(const std::filesystem::path& dir, const std::string& pattern, std::span<const Frame> frames) {
  compile_pattern(pattern);
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_png(dir / format_index(pattern, static_cast<int>(i)), frames[i]);
  }
}

CornerFile parse_corners_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, e.what());
  }
  if (!doc.is_object() || !doc.contains("frame") || !doc.contains("corners")) {
    throw Error(ErrorCode::SchemaViolation, "corner file needs \"frame\" and \"corners\"");
  }
  if (!doc["frame"].is_number_integer() || doc["frame"].get<long long>() < 0) {
    throw Error(ErrorCode::SchemaViolation, "\"frame\" must be a non-negative integer");
  }
  const json& corners = doc["corners"];
  if (!corners.is_array() || corners.size() != 4) {
    throw Error(ErrorCode::SchemaViolation, "\"corners\" must hold exactly four points");
  }
  std::array<Point, 4> pts{};
  for (std::size_t i = 0; i < 4; ++i) {
    const json& c = corners[i];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
      throw Error(ErrorCode::SchemaViolation, "each corner must be [x, y]");
    }
    pts[i] = {c[0].get<double>(), c[1].get<double>()};
  }
  return {doc["frame"].get<int>(), Quad(pts)};
}

CornerFile read_corners_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_corners_json(text.str());
}

std::string corners_json(int frame, const Quad& quad) {
  json corners = json::array();
  for (const Point& p : quad.corners()) corners.push_back({p.x, p.y});
  return json{{"frame", frame}, {"corners", corners}}.dump();
}

void write_corners_json(const std::filesystem::path& path, int frame, const Quad& quad) {
  std::ofstream out(path);
  out << corners_json(frame, quad) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

}  // namespace adforge
