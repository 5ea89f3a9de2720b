// restore: train a pair-frequency prior on binary glyphs and denoise images with it.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "qpbf/restore.hpp"

using namespace qpbf;
namespace fs = std::filesystem;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int train_cmd(const std::string& glyphs, const std::string& out, double tau) {
  const GlyphSet set = load_glyph_dir(glyphs);
  const PriorModel m = train_prior(set, tau);
  save_model(out, m);
  std::printf("trained on %d images of %dx%d, %zu of %zu pairs retained\n", m.images, m.width, m.height,
              m.retained_pairs(), m.counts.size());
  return 0;
}

int run_cmd(const std::string& model, const std::string& noisy_path, const RestoreOptions& opts,
            const std::string& out) {
  const PriorModel m = load_model(model);
  const Raster noisy = load_pbm(noisy_path);
  if (noisy.width != m.width || noisy.height != m.height)
    throw ConfigError("image is " + std::to_string(noisy.width) + "x" + std::to_string(noisy.height) +
                      ", model expects " + std::to_string(m.width) + "x" + std::to_string(m.height));
  const Restoration r = restore(m, noisy, opts);
  std::printf("solver        %s\nenergy        %.10g\nlower bound   %.10g\nnoisy energy  %.10g\n"
              "time          %.3f s\nfactors       cr %.3f  sr %.3f  ug %.3f\n",
              opts.solver.c_str(), r.energy, r.lower_bound, r.noisy_energy, r.trace.elapsed, r.factors.cr,
              r.factors.sr, r.factors.ug);
  if (!out.empty()) save_pbm(out, r.raster);
  return 0;
}

int glyphs_cmd(const std::string& out, int count, std::uint64_t seed, int size, double noise) {
  fs::create_directories(out);
  const GlyphSet set = synthetic_glyphs(count, seed, size, size);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "glyph_%03d.pbm", i);
    save_pbm(fs::path(out) / name, set.images[i]);
  }
  save_pbm(fs::path(out).parent_path() / "clean.pbm", draw_glyph(size, size));
  save_pbm(fs::path(out).parent_path() / "noisy.pbm", add_flip_noise(draw_glyph(size, size), noise, seed + 1));
  std::printf("wrote %d glyphs to %s, clean.pbm and noisy.pbm beside it\n", count, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary glyph restoration with a learned pairwise prior"};
  app.require_subcommand(1);

  std::string glyph_dir, model_out;
  double tau = 0.1;
  auto* train = app.add_subcommand("train", "Count pixel-pair co-occurrences over a directory of PBM glyphs");
  train->add_option("--glyphs", glyph_dir)->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", model_out)->required();
  train->add_option("--tau", tau, "Frequency floor")->check(CLI::Range(0.0, 1.0));

  std::string model, noisy, image_out;
  RestoreOptions opts;
  std::optional<double> budget;
  auto* run = app.add_subcommand("run", "Restore a noisy PBM image");
  run->add_option("--model", model)->required()->check(CLI::ExistingFile);
  run->add_option("--noisy", noisy)->required()->check(CLI::ExistingFile);
  run->add_option("--alpha", opts.alpha, "Data term weight");
  run->add_option("--beta", opts.beta, "Prior weight (default 2·pixels/retained pairs)");
  run->add_option("--solver", opts.solver, "Solver chain");
  run->add_option("--seed", opts.seed);
  run->add_option("--budget", budget, "Seconds");
  run->add_option("--out", image_out, "Restored PBM");

  std::string glyph_out;
  int count = 20, size = 16;
  std::uint64_t seed = 1;
  double noise = 0.2;
  auto* glyphs = app.add_subcommand("glyphs", "Write a synthetic glyph set plus a clean and a noisy sample");
  glyphs->add_option("--out", glyph_out, "Directory for the training glyphs")->required();
  glyphs->add_option("--count", count)->check(CLI::PositiveNumber);
  glyphs->add_option("--size", size)->check(CLI::Range(4, 32));
  glyphs->add_option("--seed", seed);
  glyphs->add_option("--noise", noise, "Flip probability of noisy.pbm")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) return train_cmd(glyph_dir, model_out, tau);
    if (*run) {
      opts.budget = budget;
      if (!(opts.alpha > 0)) throw ConfigError("alpha must be positive");
      if (opts.beta && *opts.beta < 0) throw ConfigError("beta must be nonnegative");
      try {
        check_solver_name(opts.solver);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
      return run_cmd(model, noisy, opts, image_out);
    }
    return glyphs_cmd(glyph_out, count, seed, size, noise);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
