#include "qpbf/restore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace qpbf {

Labeling Raster::to_labeling() const {
  Labeling x(pixels.size(), 0);
  for (std::size_t i = 0; i < pixels.size(); ++i) x[i] = static_cast<std::int8_t>(pixels[i]);
  return x;
}

Raster Raster::from_labeling(int w, int h, const Labeling& x) {
  if (static_cast<int>(x.size()) != w * h || !x.is_complete()) throw std::invalid_argument("labeling does not fit raster");
  Raster r(w, h);
  for (std::size_t i = 0; i < x.size(); ++i) r.pixels[i] = static_cast<std::uint8_t>(x[i]);
  return r;
}

void GlyphSet::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("glyphs: empty dimensions");
  if (width * height > kMaxPixels) throw std::invalid_argument("glyphs: more than 1024 pixels");
  for (const auto& r : images)
    if (r.width != width || r.height != height || static_cast<int>(r.pixels.size()) != width * height)
      throw std::invalid_argument("glyphs: dimension mismatch");
}

// ---------------------------------------------------------------------------
// Synthetic glyphs

namespace {

struct Stroke {
  double x0, y0, x1, y1;
};

// Proportional strokes of a 木-like character on the unit square.
const Stroke kStrokes[] = {
    {0.12, 0.32, 0.88, 0.32},  // cross bar
    {0.50, 0.06, 0.50, 0.94},  // trunk
    {0.47, 0.40, 0.14, 0.84},  // left sweep
    {0.53, 0.40, 0.86, 0.84},  // right sweep
};

void paint(Raster& r, const Stroke& s, double thickness) {
  const double len = std::hypot(s.x1 - s.x0, s.y1 - s.y0);
  const int steps = std::max(2, static_cast<int>(len * 4.0));
  const double half = thickness / 2.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    const double cx = s.x0 + t * (s.x1 - s.x0), cy = s.y0 + t * (s.y1 - s.y0);
    for (int y = static_cast<int>(std::floor(cy - half)); y <= static_cast<int>(std::ceil(cy + half)); ++y)
      for (int x = static_cast<int>(std::floor(cx - half)); x <= static_cast<int>(std::ceil(cx + half)); ++x) {
        if (x < 0 || y < 0 || x >= r.width || y >= r.height) continue;
        if (std::abs(x + 0.5 - cx) <= half && std::abs(y + 0.5 - cy) <= half) r.at(x, y) = 1;
      }
  }
}

Raster render(int w, int h, double dx, double dy, double jitter, std::mt19937_64* rng) {
  Raster r(w, h);
  std::uniform_real_distribution<double> j(-jitter, jitter);
  for (const auto& base : kStrokes) {
    Stroke s{base.x0 * w + dx, base.y0 * h + dy, base.x1 * w + dx, base.y1 * h + dy};
    if (rng) {
      s.x0 += j(*rng);
      s.y0 += j(*rng);
      s.x1 += j(*rng);
      s.y1 += j(*rng);
    }
    paint(r, s, std::max(1.5, w / 8.0));
  }
  return r;
}

}  // namespace

Raster draw_glyph(int w, int h) {
  if (w < 4 || h < 4) throw std::invalid_argument("glyph too small");
  return render(w, h, 0.0, 0.0, 0.0, nullptr);
}

GlyphSet synthetic_glyphs(int count, std::uint64_t seed, int w, int h) {
  if (count < 1) throw std::invalid_argument("glyph count must be positive");
  if (w < 4 || h < 4) throw std::invalid_argument("glyph too small");
  std::mt19937_64 rng(seed);
  // Mostly unshifted, so the average glyph stays crisp.
  std::discrete_distribution<int> shift({1, 6, 1});
  GlyphSet g{w, h, {}};
  for (int i = 0; i < count; ++i) {
    const int dx = shift(rng) - 1, dy = shift(rng) - 1;
    Raster r = render(w, h, dx, dy, 0.4, &rng);
    g.images.push_back(add_flip_noise(r, 0.01, rng()));
  }
  g.validate();
  return g;
}

Raster add_flip_noise(const Raster& r, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probability must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(p);
  Raster out = r;
  for (auto& px : out.pixels)
    if (flip(rng)) px ^= 1;
  return out;
}

// ---------------------------------------------------------------------------
// Prior and energy

std::size_t PriorModel::pair_index(int u, int v) const {
  const std::size_t n = pixels();
  // Pairs (u, ·) start after Σ_{i<u} (n − 1 − i) entries.
  return static_cast<std::size_t>(u) * n - static_cast<std::size_t>(u) * (u + 1) / 2 + (v - u - 1);
}

double PriorModel::frequency(int u, int v, int a, int b) const {
  if (u > v) std::swap(u, v), std::swap(a, b);
  return static_cast<double>(counts[pair_index(u, v)][2 * a + b]) / images;
}

std::size_t PriorModel::retained_pairs() const {
  std::size_t k = 0;
  for (const auto& c : counts)
    for (int e : c)
      if (static_cast<double>(e) / images >= tau) {
        ++k;
        break;
      }
  return k;
}

PriorModel train_prior(const GlyphSet& glyphs, double tau) {
  glyphs.validate();
  if (glyphs.images.size() < 2) throw std::invalid_argument("train_prior: need at least two images");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("train_prior: tau must lie in [0, 1]");
  PriorModel m;
  m.width = glyphs.width;
  m.height = glyphs.height;
  m.tau = tau;
  m.images = static_cast<int>(glyphs.images.size());
  const int n = m.pixels();
  m.counts.assign(static_cast<std::size_t>(n) * (n - 1) / 2, {0, 0, 0, 0});
  for (const auto& img : glyphs.images) {
    std::size_t p = 0;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) ++m.counts[p++][2 * img.pixels[u] + img.pixels[v]];
  }
  return m;
}

double default_beta(const PriorModel& prior) {
  const std::size_t r = prior.retained_pairs();
  return r == 0 ? 1.0 : 2.0 * prior.pixels() / static_cast<double>(r);
}

Qpbf build_restoration_energy(const PriorModel& prior, const Raster& noisy, double alpha, double beta) {
  if (noisy.width != prior.width || noisy.height != prior.height)
    throw std::invalid_argument("noisy image does not match the prior's dimensions");
  if (!(alpha > 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw std::invalid_argument("alpha must be positive and beta nonnegative");
  const int n = prior.pixels();
  Qpbf f(n);
  for (int u = 0; u < n; ++u) {
    const int y = noisy.pixels[u];
    f.add_unary(u, alpha * (-1.0 / (1.0 + std::abs(y - 0))), alpha * (-1.0 / (1.0 + std::abs(y - 1))));
  }
  if (beta == 0.0) return f;
  std::size_t p = 0;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v, ++p) {
      PairTable t{};
      bool any = false;
      for (int k = 0; k < 4; ++k) {
        const double freq = static_cast<double>(prior.counts[p][k]) / prior.images;
        if (freq >= prior.tau) {
          t[k] = -beta * freq;
          any = true;
        }
      }
      if (any) f.add_pairwise(u, v, t);
    }
  return f;
}

Restoration restore(const PriorModel& prior, const Raster& noisy, const RestoreOptions& opts) {
  check_solver_name(opts.solver);
  const double beta = opts.beta.value_or(default_beta(prior));
  const Qpbf f = build_restoration_energy(prior, noisy, opts.alpha, beta);

  SolverSpec spec;
  spec.name = opts.solver;
  RunRequest req;
  req.instance = "restore";
  req.seed = opts.seed;
  req.budget = opts.budget;
  req.init = noisy.to_labeling();

  Restoration out;
  out.trace = run_solver(spec, f, req);
  out.raster = Raster::from_labeling(noisy.width, noisy.height, out.trace.labeling);
  out.energy = out.trace.energy;
  out.lower_bound = term_wise_lower_bound(f);
  out.noisy_energy = evaluate(f, *req.init);
  out.factors = measure_factors(f);
  return out;
}

// ---------------------------------------------------------------------------
// Files

void write_pbm(std::ostream& os, const Raster& r) {
  os << "P1\n" << r.width << ' ' << r.height << '\n';
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      // Keep lines under 70 characters.
      if (x > 0) os << (x % 32 == 0 ? '\n' : ' ');
      os << static_cast<int>(r.at(x, y));
    }
    os << '\n';
  }
}

Raster read_pbm(std::istream& is) {
  auto skip = [&]() {
    while (true) {
      const int c = is.peek();
      if (c == '#') {
        std::string ignored;
        std::getline(is, ignored);
      } else if (c != EOF && std::isspace(c)) {
        is.get();
      } else {
        return;
      }
    }
  };
  std::string magic(2, '\0');
  if (!is.read(magic.data(), 2) || magic != "P1") throw std::runtime_error("pbm: expected plain P1 header");
  int w = 0, h = 0;
  skip();
  is >> w;
  skip();
  is >> h;
  if (!is || w <= 0 || h <= 0) throw std::runtime_error("pbm: bad dimensions");
  Raster r(w, h);
  for (auto& px : r.pixels) {
    skip();
    const int c = is.get();
    if (c != '0' && c != '1') throw std::runtime_error("pbm: expected a 0 or 1 pixel");
    px = static_cast<std::uint8_t>(c - '0');
  }
  return r;
}

void save_pbm(const std::filesystem::path& path, const Raster& r) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_pbm(os, r);
}

Raster load_pbm(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  try {
    return read_pbm(is);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

GlyphSet load_glyph_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pbm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .pbm files in " + dir.string());
  GlyphSet g;
  for (const auto& f : files) g.images.push_back(load_pbm(f));
  g.width = g.images.front().width;
  g.height = g.images.front().height;
  g.validate();
  return g;
}

void save_model(const std::filesystem::path& path, const PriorModel& m) {
  nlohmann::json j;
  j["width"] = m.width;
  j["height"] = m.height;
  j["tau"] = m.tau;
  j["images"] = m.images;
  auto& counts = j["counts"] = nlohmann::json::array();
  for (const auto& c : m.counts)
    for (int e : c) counts.push_back(e);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump() << '\n';
}

PriorModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  PriorModel m;
  try {
    const auto j = nlohmann::json::parse(is);
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.tau = j.at("tau").get<double>();
    m.images = j.at("images").get<int>();
    const auto& counts = j.at("counts");
    const std::size_t n = static_cast<std::size_t>(m.width) * m.height;
    if (m.images < 1 || counts.size() != 2 * n * (n - 1)) throw std::runtime_error("inconsistent sizes");
    m.counts.resize(n * (n - 1) / 2);
    for (std::size_t p = 0; p < m.counts.size(); ++p)
      for (int k = 0; k < 4; ++k) m.counts[p][k] = counts[4 * p + k].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace qpbf
