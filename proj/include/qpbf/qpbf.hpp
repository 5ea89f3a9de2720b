#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qpbf {

using VarId = int;

/// Label value of a variable; kUnlabeled marks a variable left open by a
/// partial labeling.
inline constexpr std::int8_t kUnlabeled = -1;

/// Full or partial assignment of {0,1} to variables.
class Labeling {
 public:
  Labeling() = default;
  explicit Labeling(std::size_t n, std::int8_t fill = kUnlabeled) : values_(n, fill) {}
  explicit Labeling(std::vector<std::int8_t> values) : values_(std::move(values)) {}
  Labeling(std::initializer_list<int> values);

  std::size_t size() const { return values_.size(); }
  std::int8_t operator[](std::size_t i) const { return values_[i]; }
  std::int8_t& operator[](std::size_t i) { return values_[i]; }

  bool is_complete() const;
  bool is_labeled(std::size_t i) const { return values_[i] != kUnlabeled; }
  std::size_t labeled_count() const;

  const std::vector<std::int8_t>& values() const { return values_; }

  /// "0110..." with '.' for unlabeled entries.
  std::string to_string() const;
  static Labeling from_string(const std::string& s);

  /// Reads the first min(n, 64) labels as an integer, variable 0 least significant.
  std::uint64_t to_index() const;
  static Labeling from_index(std::uint64_t index, std::size_t n);

  friend bool operator==(const Labeling&, const Labeling&) = default;

 private:
  std::vector<std::int8_t> values_;
};

/// Pairwise energy table indexed as (x_u, x_v): {00, 01, 10, 11}.
using PairTable = std::array<double, 4>;
/// Unary energy table {θ(0), θ(1)}.
using UnaryTable = std::array<double, 2>;

inline double table_at(const PairTable& t, int a, int b) { return t[2 * a + b]; }

struct PairTerm {
  VarId u;  // u < v
  VarId v;
  PairTable table;
};

/// Quadratic pseudo-Boolean function
///   E(x) = const + Σ_u θ_u(x_u) + Σ_(u,v) θ_uv(x_u, x_v).
/// Pairwise terms are kept once per unordered pair, oriented so that u < v.
class Qpbf {
 public:
  Qpbf() = default;
  explicit Qpbf(int n);

  int num_vars() const { return static_cast<int>(unary_.size()); }
  std::size_t num_pairs() const { return pairs_.size(); }

  double constant() const { return constant_; }
  void add_constant(double c);

  const UnaryTable& unary(VarId u) const { return unary_.at(u); }
  void add_unary(VarId u, double e0, double e1);

  /// Adds θ(x_u, x_v) given in (u, v) orientation; tables on the same
  /// unordered pair are summed.
  void add_pairwise(VarId u, VarId v, const PairTable& table);

  const std::vector<PairTerm>& pairs() const { return pairs_; }
  /// Index into pairs() of every term touching u.
  const std::vector<int>& incident(VarId u) const { return incident_.at(u); }

  /// Returns the table oriented as θ(x_u, x_v), or nullptr if the pair has no term.
  const PairTerm* find_pair(VarId u, VarId v) const;

 private:
  std::vector<UnaryTable> unary_;
  std::vector<PairTerm> pairs_;
  std::vector<std::vector<int>> incident_;
  std::unordered_map<std::uint64_t, int> pair_index_;
  double constant_ = 0.0;
};

/// Θ(x_u, x_v) for a term in its stored orientation, looked up from the
/// viewpoint of `self` (which must be one of the term's endpoints).
double pair_energy_from(const PairTerm& term, VarId self, int self_label, int other_label);

struct QuadTerm {
  VarId u;  // u < v
  VarId v;
  double coef;
};

/// Standard (multilinear) form Σ θ_u x_u + Σ θ_uv x_u x_v + const.
struct StdQpbf {
  std::vector<double> linear;
  std::vector<QuadTerm> quad;
  double constant = 0.0;

  int num_vars() const { return static_cast<int>(linear.size()); }
};

double evaluate(const Qpbf& f, const Labeling& x);
double evaluate(const StdQpbf& f, const Labeling& x);

StdQpbf to_standard(const Qpbf& f);
/// Embeds a standard form as unary (0, θ_u) and pairwise (0, 0, 0, θ_uv) tables.
Qpbf from_standard(const StdQpbf& f);

inline constexpr int kBruteForceMaxVars = 25;

struct BruteForceResult {
  Labeling labeling;
  double energy;
};

/// Exhaustive global minimum; ties go to the labeling with the smallest
/// integer value (variable 0 least significant).
BruteForceResult brute_force_min(const Qpbf& f);

/// Σ_u min θ_u + Σ_uv min θ_uv + const.
double term_wise_lower_bound(const Qpbf& f);

/// Text format:
///   qpbf <n> <num_pairs> <const>
///   u <id> <θ0> <θ1>
///   p <u> <v> <θ00> <θ01> <θ10> <θ11>
void write_qpbf(std::ostream& os, const Qpbf& f);
Qpbf read_qpbf(std::istream& is);
void save_qpbf(const std::string& path, const Qpbf& f);
Qpbf load_qpbf(const std::string& path);

}  // namespace qpbf
