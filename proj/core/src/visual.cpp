#include "ctrex/visual.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace ctrex {

namespace {

void add_bump(std::vector<double>& mask, ImageShape shape, std::size_t center, double mass, double sigma) {
  const auto cx = static_cast<long>(center % shape.width);
  const auto cy = static_cast<long>(center / shape.width);
  const double cutoff = 4.0 * sigma;
  const auto reach = static_cast<long>(std::floor(cutoff));
  std::vector<std::pair<std::size_t, double>> support;
  double total = 0.0;
  for (long dy = -reach; dy <= reach; ++dy) {
    for (long dx = -reach; dx <= reach; ++dx) {
      const long px = cx + dx, py = cy + dy;
      if (px < 0 || py < 0 || px >= static_cast<long>(shape.width) || py >= static_cast<long>(shape.height)) {
        continue;
      }
      const double d2 = static_cast<double>(dx * dx + dy * dy);
      if (d2 > cutoff * cutoff) continue;
      const double k = std::exp(-d2 / (2.0 * sigma * sigma));
      support.emplace_back(static_cast<std::size_t>(py) * shape.width + static_cast<std::size_t>(px), k);
      total += k;
    }
  }
  for (const auto& [p, k] : support) mask[p] += mass * k / total;
}

std::vector<double> scaled(const std::vector<double>& raw) {
  const double peak = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
  std::vector<double> out(raw.size(), 0.0);
  if (peak <= 0.0) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / peak;
  return out;
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
}

void check_image(std::span<const double> image, ImageShape shape) {
  if (shape.pixels() == 0 || image.size() != shape.pixels()) {
    throw ShapeError("image has " + std::to_string(image.size()) + " values, shape needs " +
                     std::to_string(shape.pixels()));
  }
}

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

ImageShape square_shape(std::size_t pixels) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(pixels))));
  if (side == 0 || side * side != pixels) {
    throw ShapeError(std::to_string(pixels) + " features do not form a square image");
  }
  return {side, side};
}

ContrastOverlay render_contrast(const Instance& x, const Instance& x_prime, ImageShape shape, double kernel_sigma,
                                double tolerance) {
  if (x.size() != shape.pixels() || x_prime.size() != shape.pixels() || shape.pixels() == 0) {
    throw ShapeError("images do not match the " + std::to_string(shape.width) + "x" +
                     std::to_string(shape.height) + " shape");
  }
  if (!(kernel_sigma > 0.0)) throw std::invalid_argument("kernel_sigma must be positive");
  ContrastOverlay o;
  o.shape = shape;
  o.kernel_sigma = kernel_sigma;
  o.pp_raw.assign(shape.pixels(), 0.0);
  o.pn_raw.assign(shape.pixels(), 0.0);
  o.provenance.assign(shape.pixels(), Provenance::kNone);
  for (std::size_t p = 0; p < shape.pixels(); ++p) {
    const double delta = x_prime[p] - x[p];
    if (std::abs(delta) <= tolerance) continue;
    if (delta > 0) {
      o.provenance[p] = Provenance::kNegative;
      add_bump(o.pn_raw, shape, p, delta, kernel_sigma);
    } else {
      o.provenance[p] = Provenance::kPositive;
      add_bump(o.pp_raw, shape, p, -delta, kernel_sigma);
    }
  }
  o.pp_mask = scaled(o.pp_raw);
  o.pn_mask = scaled(o.pn_raw);
  return o;
}

void write_pgm(const std::filesystem::path& path, std::span<const double> image, ImageShape shape, double vmax,
               std::size_t scale) {
  check_image(image, shape);
  if (!(vmax > 0.0) || scale == 0) throw std::invalid_argument("vmax and scale must be positive");
  auto out = open_binary(path);
  out << "P5\n" << shape.width * scale << " " << shape.height * scale << "\n255\n";
  for (std::size_t y = 0; y < shape.height * scale; ++y) {
    for (std::size_t x = 0; x < shape.width * scale; ++x) {
      out.put(static_cast<char>(to_byte(255.0 * image[(y / scale) * shape.width + x / scale] / vmax)));
    }
  }
}

void write_overlay_ppm(const std::filesystem::path& path, std::span<const double> base,
                       const ContrastOverlay& overlay, double vmax, std::size_t scale) {
  check_image(base, overlay.shape);
  if (!(vmax > 0.0) || scale == 0) throw std::invalid_argument("vmax and scale must be positive");
  const auto shape = overlay.shape;
  auto out = open_binary(path);
  out << "P6\n" << shape.width * scale << " " << shape.height * scale << "\n255\n";
  for (std::size_t y = 0; y < shape.height * scale; ++y) {
    for (std::size_t x = 0; x < shape.width * scale; ++x) {
      const auto p = (y / scale) * shape.width + x / scale;
      const double gray = 255.0 * base[p] / vmax;
      const double pp = overlay.pp_mask[p], pn = overlay.pn_mask[p];
      const double keep = 1.0 - std::max(pp, pn);
      out.put(static_cast<char>(to_byte(gray * keep + 255.0 * pp)));
      out.put(static_cast<char>(to_byte(gray * keep + 255.0 * pn)));
      out.put(static_cast<char>(to_byte(gray * keep)));
    }
  }
}

}  // namespace ctrex
