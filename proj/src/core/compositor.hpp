#pragma once

#include "core/geometry.hpp"
#include "core/imagecore.hpp"
#include "core/maskops.hpp"

namespace adforge {

// Replacement creative. Its source quad is the full image rectangle
// (0,0)-(w,h) in image coordinates.
class Advert {
 public:
  explicit Advert(Frame image);

  const Frame& image() const noexcept { return image_; }
  const Quad& source_quad() const noexcept { return source_quad_; }

 private:
  Frame image_;
  Quad source_quad_;
};

enum class BlendMode { Poisson, Direct };

struct BlendConfig {
  BlendMode mode = BlendMode::Poisson;
  double solver_tolerance = 1e-6;  // relative residual |Af - b| / |b|
  int max_iterations = 10000;

  void validate() const;
};

struct Warped {
  Frame image;       // advert samples on omega and its one-pixel ring, zero elsewhere
  BinaryMask omega;  // destination quad rasterised and clipped to the frame
};

// Inverse mapping with bilinear sampling. Throws EmptyOmega, PointAtInfinity.
Warped warp_advert(const Advert& ad, const Homography& h, int width, int height);

struct BlendResult {
  Frame image;
  double residual = 0.0;  // worst relative residual over the three channels
  int iterations = 0;     // most iterations used by any channel
  bool converged = true;  // false: NoConvergence, residual above 10x tolerance
};

// Seamless cloning: per channel, solve the 4-neighbour Poisson system over
// omega with Dirichlet data from `target` on the outer ring and guidance from
// `source` differences, by unpreconditioned conjugate gradient. Pixels outside
// omega are copied from `target`. Throws EmptyOmega, OmegaTouchesBorder.
BlendResult poisson_blend(const Frame& target, const Frame& source, const BinaryMask& omega,
                          const BlendConfig& cfg);

Frame direct_composite(const Frame& target, const Frame& source, const BinaryMask& omega);

Frame clamp_frame(Frame f);

}  // namespace adforge
