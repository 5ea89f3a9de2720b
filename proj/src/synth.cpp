#include "qpbf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "qpbf/char_graph.hpp"

namespace qpbf {

namespace {

std::uint64_t pair_count(int n) { return static_cast<std::uint64_t>(n) * (n - 1) / 2; }

// Floyd's algorithm: m distinct values from [0, total), returned sorted.
std::vector<std::uint64_t> sample_distinct(std::uint64_t total, std::uint64_t m, std::mt19937_64& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(m * 2);
  for (std::uint64_t j = total - m; j < total; ++j) {
    const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

double nonzero_magnitude(std::uniform_real_distribution<double>& mag, std::mt19937_64& rng) {
  double x = 0.0;
  while (x == 0.0) x = mag(rng);
  return x;
}

}  // namespace

std::size_t FactorSpec::target_edges() const {
  return static_cast<std::size_t>(std::llround(cr * static_cast<double>(n) * n / 2.0));
}

void FactorSpec::validate() const {
  if (n < 2) throw std::invalid_argument("spec: n must be at least 2");
  if (!(cr > 0.0 && cr <= 1.0)) throw std::invalid_argument("spec: cr must lie in (0, 1]");
  if (!(sr >= 0.0 && sr <= 1.0)) throw std::invalid_argument("spec: sr must lie in [0, 1]");
  if (!(ug >= 0.0) || !std::isfinite(ug)) throw std::invalid_argument("spec: ug must be finite and nonnegative");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("spec: scale must be finite and positive");
  const std::size_t m = target_edges();
  if (m < 1) throw std::invalid_argument("spec: cr too small for n, no edges");
  if (m > pair_count(n))
    throw std::invalid_argument("spec: cr=" + std::to_string(cr) + " needs " + std::to_string(m) + " pairs but n=" +
                                std::to_string(n) + " has only " + std::to_string(pair_count(n)));
}

Qpbf generate(const FactorSpec& spec) {
  spec.validate();
  const int n = spec.n;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> mag(0.0, spec.scale);

  const std::size_t m = spec.target_edges();
  const auto picks = sample_distinct(pair_count(n), m, rng);

  // Which edges come out supermodular: exactly round(sr·m) of them.
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const auto negative = static_cast<std::size_t>(std::llround(spec.sr * static_cast<double>(m)));
  std::vector<char> super(m, 0);
  for (std::size_t i = 0; i < negative; ++i) super[order[i]] = 1;

  StdQpbf s;
  s.linear.assign(n, 0.0);
  s.quad.reserve(m);
  std::vector<double> half_sum(n, 0.0);  // ½ Σ_v b_uv, what the quadratic terms add to each indicator
  double quad_abs = 0.0;
  {
    int u = 0;
    std::uint64_t row_start = 0;  // index of pair (u, u+1)
    for (std::size_t i = 0; i < m; ++i) {
      while (picks[i] >= row_start + (n - 1 - u)) {
        row_start += n - 1 - u;
        ++u;
      }
      const int v = u + 1 + static_cast<int>(picks[i] - row_start);
      // b·x_u·x_v has c_uv = −b/2, so b > 0 is the supermodular sign.
      const double mg = nonzero_magnitude(mag, rng);
      const double b = super[i] ? mg : -mg;
      s.quad.push_back({u, v, b});
      half_sum[u] += 0.5 * b;
      half_sum[v] += 0.5 * b;
      quad_abs += mg;
    }
  }

  // Net indicator weight of u is a_u + half_sum[u]. Setting it to k·r_u makes
  // the measured ug equal k·mean|r| / mean|b|, so k has a closed form.
  std::vector<double> r(n);
  double r_abs = 0.0;
  for (int u = 0; u < n; ++u) {
    const double mg = nonzero_magnitude(mag, rng);
    r[u] = (rng() >> 63) ? mg : -mg;
    r_abs += mg;
  }
  const double k = spec.ug * (quad_abs / static_cast<double>(m)) / (r_abs / n);
  for (int u = 0; u < n; ++u) s.linear[u] = k * r[u] - half_sum[u];

  return from_standard(s);
}

Factors measure_factors(const Qpbf& f) {
  const CharGraph g = characterize(f);
  const int n = g.num_nodes();
  Factors out;
  if (n == 0 || g.num_edges() == 0) return out;
  const double e = static_cast<double>(g.num_edges());
  out.cr = 2.0 * e / (static_cast<double>(n) * n);
  out.sr = static_cast<double>(g.negative_edge_count()) / e;
  double ind = 0.0;
  for (int u = 0; u < n; ++u) ind += 0.5 * (std::abs(g.indicator(u).to_zero) + std::abs(g.indicator(u).to_one));
  const double var = g.negative_mass() + g.positive_mass();
  out.ug = (ind / n) / (var / e);
  return out;
}

FactorSpec parse_spec(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("spec: bad JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("spec: expected a JSON object");
  FactorSpec s;
  try {
    s.n = j.at("n").get<int>();
    s.cr = j.at("cr").get<double>();
    s.sr = j.at("sr").get<double>();
    s.ug = j.at("ug").get<double>();
    s.scale = j.value("scale", s.scale);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<FactorSpec> read_spec_lines(std::istream& is) {
  std::vector<FactorSpec> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_spec(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qpbf
