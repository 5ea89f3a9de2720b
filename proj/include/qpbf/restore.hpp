#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qpbf/qpbf.hpp"
#include "qpbf/solvers.hpp"
#include "qpbf/synth.hpp"

namespace qpbf {

/// Binary image, row-major, 1 = ink.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  int size() const { return width * height; }

  Labeling to_labeling() const;
  static Raster from_labeling(int w, int h, const Labeling& x);

  friend bool operator==(const Raster&, const Raster&) = default;
};

struct GlyphSet {
  int width = 0;
  int height = 0;
  std::vector<Raster> images;

  static constexpr int kMaxPixels = 1024;
  void validate() const;
};

/// A stroke glyph resembling a simple ideogram, drawn into a w×h raster.
Raster draw_glyph(int w = 16, int h = 16);

/// `count` copies of draw_glyph with small random shifts, stroke jitter and
/// sparse pixel noise.
GlyphSet synthetic_glyphs(int count, std::uint64_t seed, int w = 16, int h = 16);

/// Flips every pixel independently with probability p.
Raster add_flip_noise(const Raster& r, double p, std::uint64_t seed);

/// Pixel-pair co-occurrence counts. Pairs are stored for u < v in
/// lexicographic order; table entry 2a + b counts images with x_u = a, x_v = b.
struct PriorModel {
  int width = 0;
  int height = 0;
  double tau = 0.1;  // frequencies below this are dropped when building energies
  int images = 0;
  std::vector<std::array<int, 4>> counts;

  int pixels() const { return width * height; }
  std::size_t pair_index(int u, int v) const;  // u < v
  /// Raw frequency f_uv(a, b), before flooring.
  double frequency(int u, int v, int a, int b) const;
  /// Pairs with at least one frequency ≥ tau.
  std::size_t retained_pairs() const;
};

PriorModel train_prior(const GlyphSet& glyphs, double tau = 0.1);

/// 2·|pixels| / |retained pairs|, so both terms of the energy have a similar total size.
double default_beta(const PriorModel& prior);

/// E(x) = α Σ_u −1/(1 + |Y_u − x_u|) − β Σ_uv f̃_uv(x_u, x_v), f̃ the floored frequencies.
Qpbf build_restoration_energy(const PriorModel& prior, const Raster& noisy, double alpha, double beta);

struct Restoration {
  Raster raster;
  double energy = 0.0;
  double lower_bound = 0.0;  // term-wise bound of the energy
  double noisy_energy = 0.0;
  Factors factors;
  RunTrace trace;
};

struct RestoreOptions {
  double alpha = 1.0;
  std::optional<double> beta;  // default_beta if unset
  std::string solver = "essp";
  std::uint64_t seed = 0;
  std::optional<double> budget;
};

/// Solvers that take a starting labeling begin from the noisy image.
Restoration restore(const PriorModel& prior, const Raster& noisy, const RestoreOptions& opts);

void write_pbm(std::ostream& os, const Raster& r);
Raster read_pbm(std::istream& is);
void save_pbm(const std::filesystem::path& path, const Raster& r);
Raster load_pbm(const std::filesystem::path& path);

/// All *.pbm files of a directory, sorted by name.
GlyphSet load_glyph_dir(const std::filesystem::path& dir);

void save_model(const std::filesystem::path& path, const PriorModel& m);
PriorModel load_model(const std::filesystem::path& path);

}  // namespace qpbf
