#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <variant>

#include "core/imagecore.hpp"
#include "core/maskops.hpp"

namespace adforge {

// Heatmaps produced by an external model, one PGM per frame named
// `<stem>_%06d.pgm` inside `dir`.
struct HeatmapFiles {
  std::filesystem::path dir;
  std::string stem = "heatmap";
};

// Gaussian colour similarity to a reference colour:
// exp(-|rgb - reference|^2 / (2 sigma^2)).
// The synthetic scene generator paints its billboards in this colour.
inline constexpr std::array<double, 3> kBillboardGreen{0.15, 0.75, 0.25};

struct ChromaBaseline {
  std::array<double, 3> reference = kBillboardGreen;
  double sigma = 0.1;
};

using DetectorSource = std::variant<HeatmapFiles, ChromaBaseline>;

std::filesystem::path heatmap_path(const HeatmapFiles& files, int frame_index);

// Presence score: the maximum of the localisation heatmap.
double recognize(const DetectorSource& source, int frame_index, const Frame& frame);

Heatmap localize(const DetectorSource& source, int frame_index, const Frame& frame);

// Binary PGM (P5), maxval 255 or 65535 (big-endian samples).
Heatmap load_heatmap_pgm(const std::filesystem::path& path);
void write_heatmap_pgm(const std::filesystem::path& path, const Heatmap& heatmap, int maxval = 255);

}  // namespace adforge
