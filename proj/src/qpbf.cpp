#include "qpbf/qpbf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qpbf {

namespace {

std::uint64_t pair_key(VarId u, VarId v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::invalid_argument(std::string("non-finite ") + what);
}

void check_complete(const Labeling& x, int n) {
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("labeling length " + std::to_string(x.size()) +
                                " does not match " + std::to_string(n) + " variables");
  if (!x.is_complete()) throw std::invalid_argument("labeling is incomplete");
}

}  // namespace

// ---------------------------------------------------------------------------
// Labeling

Labeling::Labeling(std::initializer_list<int> values) {
  values_.reserve(values.size());
  for (int v : values) values_.push_back(static_cast<std::int8_t>(v));
}

bool Labeling::is_complete() const {
  return std::none_of(values_.begin(), values_.end(), [](std::int8_t v) { return v == kUnlabeled; });
}

std::size_t Labeling::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](std::int8_t v) { return v != kUnlabeled; }));
}

std::string Labeling::to_string() const {
  std::string s(values_.size(), '.');
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] != kUnlabeled) s[i] = static_cast<char>('0' + values_[i]);
  return s;
}

Labeling Labeling::from_string(const std::string& s) {
  Labeling x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    switch (s[i]) {
      case '0': x[i] = 0; break;
      case '1': x[i] = 1; break;
      case '.': x[i] = kUnlabeled; break;
      default: throw std::invalid_argument("bad labeling character '" + std::string(1, s[i]) + "'");
    }
  }
  return x;
}

std::uint64_t Labeling::to_index() const {
  std::uint64_t idx = 0;
  const std::size_t m = std::min<std::size_t>(values_.size(), 64);
  for (std::size_t i = 0; i < m; ++i)
    if (values_[i] == 1) idx |= std::uint64_t{1} << i;
  return idx;
}

Labeling Labeling::from_index(std::uint64_t index, std::size_t n) {
  Labeling x(n, 0);
  for (std::size_t i = 0; i < n && i < 64; ++i) x[i] = static_cast<std::int8_t>((index >> i) & 1);
  return x;
}

// ---------------------------------------------------------------------------
// Qpbf

Qpbf::Qpbf(int n) {
  if (n < 0) throw std::invalid_argument("negative variable count");
  unary_.assign(n, UnaryTable{0.0, 0.0});
  incident_.resize(n);
}

void Qpbf::add_constant(double c) {
  require_finite(c, "constant");
  constant_ += c;
}

void Qpbf::add_unary(VarId u, double e0, double e1) {
  if (u < 0 || u >= num_vars()) throw std::out_of_range("unary variable out of range");
  require_finite(e0, "unary energy");
  require_finite(e1, "unary energy");
  unary_[u][0] += e0;
  unary_[u][1] += e1;
}

void Qpbf::add_pairwise(VarId u, VarId v, const PairTable& table) {
  if (u < 0 || v < 0 || u >= num_vars() || v >= num_vars())
    throw std::out_of_range("pairwise variable out of range");
  if (u == v) throw std::invalid_argument("self pair");
  for (double e : table) require_finite(e, "pairwise energy");

  PairTable oriented = table;
  if (u > v) {
    std::swap(u, v);
    std::swap(oriented[1], oriented[2]);
  }
  const auto key = pair_key(u, v);
  if (auto it = pair_index_.find(key); it != pair_index_.end()) {
    auto& t = pairs_[it->second].table;
    for (int k = 0; k < 4; ++k) t[k] += oriented[k];
    return;
  }
  const int idx = static_cast<int>(pairs_.size());
  pairs_.push_back({u, v, oriented});
  pair_index_.emplace(key, idx);
  incident_[u].push_back(idx);
  incident_[v].push_back(idx);
}

const PairTerm* Qpbf::find_pair(VarId u, VarId v) const {
  if (u > v) std::swap(u, v);
  auto it = pair_index_.find(pair_key(u, v));
  return it == pair_index_.end() ? nullptr : &pairs_[it->second];
}

double pair_energy_from(const PairTerm& term, VarId self, int self_label, int other_label) {
  return self == term.u ? table_at(term.table, self_label, other_label)
                        : table_at(term.table, other_label, self_label);
}

// ---------------------------------------------------------------------------
// Evaluation and standard form

double evaluate(const Qpbf& f, const Labeling& x) {
  check_complete(x, f.num_vars());
  double e = f.constant();
  for (int u = 0; u < f.num_vars(); ++u) e += f.unary(u)[x[u]];
  for (const auto& p : f.pairs()) e += table_at(p.table, x[p.u], x[p.v]);
  return e;
}

double evaluate(const StdQpbf& f, const Labeling& x) {
  check_complete(x, f.num_vars());
  double e = f.constant;
  for (int u = 0; u < f.num_vars(); ++u)
    if (x[u]) e += f.linear[u];
  for (const auto& q : f.quad)
    if (x[q.u] && x[q.v]) e += q.coef;
  return e;
}

StdQpbf to_standard(const Qpbf& f) {
  StdQpbf s;
  s.linear.assign(f.num_vars(), 0.0);
  s.constant = f.constant();
  for (int u = 0; u < f.num_vars(); ++u) {
    const auto& t = f.unary(u);
    s.constant += t[0];
    s.linear[u] += t[1] - t[0];
  }
  s.quad.reserve(f.num_pairs());
  for (const auto& p : f.pairs()) {
    const auto& [t00, t01, t10, t11] = p.table;
    s.constant += t00;
    s.linear[p.u] += t10 - t00;
    s.linear[p.v] += t01 - t00;
    const double q = t00 - t01 - t10 + t11;
    if (q != 0.0) s.quad.push_back({p.u, p.v, q});
  }
  return s;
}

Qpbf from_standard(const StdQpbf& s) {
  Qpbf f(s.num_vars());
  f.add_constant(s.constant);
  for (int u = 0; u < s.num_vars(); ++u)
    if (s.linear[u] != 0.0) f.add_unary(u, 0.0, s.linear[u]);
  for (const auto& q : s.quad) f.add_pairwise(q.u, q.v, {0.0, 0.0, 0.0, q.coef});
  return f;
}

// ---------------------------------------------------------------------------
// Brute force

BruteForceResult brute_force_min(const Qpbf& f) {
  const int n = f.num_vars();
  if (n > kBruteForceMaxVars)
    throw std::invalid_argument("brute_force_min: " + std::to_string(n) + " variables exceeds cap of " +
                                std::to_string(kBruteForceMaxVars));
  if (n == 0) return {Labeling{}, f.constant()};

  // Gray-code walk with incremental energies in standard form. Round-off in
  // the running sum is absorbed by keeping every labeling within a small
  // window of the running best and re-evaluating those exactly at the end.
  const StdQpbf s = to_standard(f);
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  double scale = std::abs(s.constant);
  for (const auto& q : s.quad) {
    adj[q.u].push_back({q.v, q.coef});
    adj[q.v].push_back({q.u, q.coef});
    scale += std::abs(q.coef);
  }
  for (double l : s.linear) scale += std::abs(l);
  const double window = 1e-9 * std::max(scale, 1.0);

  std::vector<std::int8_t> x(n, 0);
  std::uint64_t code = 0;
  double energy = s.constant;
  double best = energy;
  std::vector<std::uint64_t> candidates{0};

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int u = std::countr_zero(k);
    double delta = s.linear[u];
    for (const auto& [v, c] : adj[u])
      if (x[v]) delta += c;
    if (x[u]) {
      energy -= delta;
      x[u] = 0;
    } else {
      energy += delta;
      x[u] = 1;
    }
    code ^= std::uint64_t{1} << u;

    if (energy < best - window) {
      best = energy;
      candidates.clear();
      candidates.push_back(code);
    } else if (energy <= best + window) {
      if (energy < best) best = energy;
      candidates.push_back(code);
    }
  }

  BruteForceResult result{Labeling{}, std::numeric_limits<double>::infinity()};
  std::uint64_t best_code = 0;
  for (std::uint64_t c : candidates) {
    Labeling cand = Labeling::from_index(c, n);
    const double e = evaluate(f, cand);
    if (e < result.energy || (e == result.energy && c < best_code)) {
      result = {std::move(cand), e};
      best_code = c;
    }
  }
  return result;
}

double term_wise_lower_bound(const Qpbf& f) {
  double lb = f.constant();
  for (int u = 0; u < f.num_vars(); ++u) lb += std::min(f.unary(u)[0], f.unary(u)[1]);
  for (const auto& p : f.pairs()) lb += *std::min_element(p.table.begin(), p.table.end());
  return lb;
}

// ---------------------------------------------------------------------------
// Text format

void write_qpbf(std::ostream& os, const Qpbf& f) {
  const auto old_prec = os.precision(std::numeric_limits<double>::max_digits10);
  os << "qpbf " << f.num_vars() << ' ' << f.num_pairs() << ' ' << f.constant() << '\n';
  for (int u = 0; u < f.num_vars(); ++u) {
    const auto& t = f.unary(u);
    if (t[0] == 0.0 && t[1] == 0.0) continue;
    os << "u " << u << ' ' << t[0] << ' ' << t[1] << '\n';
  }
  for (const auto& p : f.pairs()) {
    os << "p " << p.u << ' ' << p.v;
    for (double e : p.table) os << ' ' << e;
    os << '\n';
  }
  os.precision(old_prec);
}

Qpbf read_qpbf(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("qpbf line " + std::to_string(line_no) + ": " + msg);
  };

  Qpbf f;
  bool have_header = false;
  std::size_t declared_pairs = 0;
  std::size_t seen_pairs = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "qpbf") {
      if (have_header) fail("duplicate header");
      int n = 0;
      double c = 0.0;
      if (!(ls >> n >> declared_pairs >> c) || n < 0) fail("malformed header");
      f = Qpbf(n);
      f.add_constant(c);
      have_header = true;
    } else if (!have_header) {
      fail("missing header");
    } else if (tag == "u") {
      int u = 0;
      double e0 = 0.0, e1 = 0.0;
      if (!(ls >> u >> e0 >> e1)) fail("malformed unary");
      if (u < 0 || u >= f.num_vars()) fail("unary id out of range");
      f.add_unary(u, e0, e1);
    } else if (tag == "p") {
      int u = 0, v = 0;
      PairTable t{};
      if (!(ls >> u >> v >> t[0] >> t[1] >> t[2] >> t[3])) fail("malformed pair");
      if (u < 0 || v < 0 || u >= f.num_vars() || v >= f.num_vars() || u == v) fail("bad pair ids");
      f.add_pairwise(u, v, t);
      ++seen_pairs;
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (!have_header) throw std::runtime_error("qpbf: empty input");
  if (seen_pairs != declared_pairs)
    throw std::runtime_error("qpbf: header declares " + std::to_string(declared_pairs) + " pairs, found " +
                             std::to_string(seen_pairs));
  return f;
}

void save_qpbf(const std::string& path, const Qpbf& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_qpbf(os, f);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Qpbf load_qpbf(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_qpbf(is);
}

}  // namespace qpbf
