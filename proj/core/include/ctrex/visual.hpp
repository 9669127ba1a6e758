#pragma once

// Pertinent-positive / pertinent-negative overlays for image counterfactuals.
// Pixels whose intensity drops in x' feed the PP mask, pixels that brighten
// feed the PN mask; each change spreads as a Gaussian bump.

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctrex/dataset.hpp"

namespace ctrex {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ImageShape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t pixels() const { return width * height; }
};

/// Square shape for `pixels` features; throws ShapeError if not a square.
ImageShape square_shape(std::size_t pixels);

enum class Provenance : signed char { kNone = 0, kPositive = -1, kNegative = 1 };

struct ContrastOverlay {
  ImageShape shape;
  double kernel_sigma = 1.0;
  /// Masks scaled to a peak of 1 (all-zero when nothing changed).
  std::vector<double> pp_mask;
  std::vector<double> pn_mask;
  /// Unscaled masks: each changed pixel adds a bump of total mass |delta|.
  std::vector<double> pp_raw;
  std::vector<double> pn_raw;
  /// Per pixel: reduced (PP), amplified (PN) or unchanged.
  std::vector<Provenance> provenance;
};

/// Kernel is truncated at 4 sigma and renormalized inside the image, so the
/// raw mask integrals equal the summed absolute intensity changes.
ContrastOverlay render_contrast(const Instance& x, const Instance& x_prime, ImageShape shape,
                                double kernel_sigma = 1.0, double tolerance = 1e-9);

/// Grayscale image, intensities mapped from [0, vmax] to [0, 255]; each pixel
/// becomes a scale x scale block.
void write_pgm(const std::filesystem::path& path, std::span<const double> image, ImageShape shape, double vmax,
               std::size_t scale = 16);

/// Color overlay on the grayscale `base`: PP in the red channel, PN in green.
void write_overlay_ppm(const std::filesystem::path& path, std::span<const double> base,
                       const ContrastOverlay& overlay, double vmax, std::size_t scale = 16);

}  // namespace ctrex
