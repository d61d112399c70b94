#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sgid/graph.hpp"

namespace sgid {

using Assignment = std::map<std::string, int>;

struct Variable {
  std::string name;
  std::size_t card = 2;

  friend bool operator==(const Variable&, const Variable&) = default;
};

enum class ZeroPolicy {
  strict,       ///< any zero denominator is an error
  allow_zeros,  ///< 0/0 := 0; a positive numerator over zero is still an error
};

/// Largest table the algebra will materialize.
inline constexpr std::size_t kMaxCells = std::size_t{1} << 20;

/// Unnormalized nonnegative table over named finite variables, row-major with
/// the last variable varying fastest.
class Factor {
 public:
  Factor() : table_{1.0} {}
  Factor(std::vector<Variable> vars, std::vector<double> table);

  static Factor constant(double value);
  static Factor uniform(std::vector<Variable> vars);

  const std::vector<Variable>& variables() const noexcept { return vars_; }
  const std::vector<double>& table() const noexcept { return table_; }
  std::vector<double>& mutable_table() noexcept { return table_; }
  std::size_t size() const noexcept { return table_.size(); }
  VertexSet names() const;

  bool has(std::string_view name) const;
  std::size_t position(std::string_view name) const;
  std::size_t card(std::string_view name) const { return vars_[position(name)].card; }

  /// Value at a full assignment of this factor's variables (extra keys ignored).
  double at(const Assignment& a) const;
  /// Decodes a linear cell index into an assignment.
  Assignment assignment(std::size_t cell) const;

  Factor sum_out(const VertexSet& names) const;
  Factor keep_only(const VertexSet& names) const;
  /// Sums out `names` and divides by the number of configurations summed.
  Factor average_out(const VertexSet& names) const;
  Factor restrict(const Assignment& a) const;
  Factor reorder(const VertexSet& order) const;
  double total() const;

  friend Factor multiply(const Factor& x, const Factor& y);
  /// Pointwise quotient over the union of both variable sets.
  friend Factor divide(const Factor& x, const Factor& y, ZeroPolicy policy);

 private:
  std::vector<Variable> vars_;
  std::vector<double> table_;
};

Factor multiply(const Factor& x, const Factor& y);
Factor divide(const Factor& x, const Factor& y, ZeroPolicy policy);

/// Kernel q(random | conditioning); a joint when conditioning is empty.
/// Holds the factor as-is: normalization is checked at construction from
/// external input, and the algebra below preserves it when used as intended.
class TabularDist {
 public:
  TabularDist() = default;
  TabularDist(Factor f, VertexSet conditioning);

  /// Constructs and verifies per-context normalization within `tol`.
  static TabularDist checked(Factor f, VertexSet conditioning, double tol = 1e-9);

  const Factor& factor() const noexcept { return f_; }
  const VertexSet& conditioning() const noexcept { return cond_; }
  VertexSet random() const;
  VertexSet names() const { return f_.names(); }
  bool is_context(std::string_view name) const;

  /// Sums out random variables. Context or unknown names are errors.
  TabularDist marginalize(const VertexSet& s) const;
  /// Moves random variables `s` into the context by division by their margin.
  TabularDist condition(const VertexSet& s, ZeroPolicy policy = ZeroPolicy::strict) const;
  /// Fixes context variables to values and drops them.
  TabularDist restrict(const Assignment& a) const;
  /// Kernel product; random sets must be disjoint.
  TabularDist product(const TabularDist& other) const;
  /// Quotient; the result's random set is random(this) \ random(other).
  TabularDist divide(const TabularDist& other, ZeroPolicy policy = ZeroPolicy::strict) const;
  /// Averages context variables out over the context values whose row is
  /// defined; exact when the kernel does not depend on them.
  TabularDist drop_context(const VertexSet& s) const;
  TabularDist reorder(const VertexSet& order) const;

  /// Largest |Σ_random q − 1| over contexts; all-zero contexts are skipped when
  /// `skip_zero_rows` is set.
  double normalization_error(bool skip_zero_rows = false) const;

 private:
  Factor f_;
  VertexSet cond_;
};

TabularDist parse_dist(std::string_view json_text);
std::string dist_to_json(const TabularDist& d, int indent = 2);

/// "A1=1, M1=0" rendering used in error messages.
std::string describe(const Assignment& a);

}  // namespace sgid
