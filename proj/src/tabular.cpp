#include "sgid/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sgid/kernels.hpp"

namespace sgid {

namespace {

std::size_t checked_cells(const std::vector<Variable>& vars) {
  std::size_t n = 1;
  for (const auto& v : vars) {
    if (v.card == 0) throw Error(ErrorCode::malformed, "variable " + v.name + " has cardinality 0");
    if (n > kMaxCells / v.card) throw Error(ErrorCode::cap_exceeded, "table exceeds 2^20 cells");
    n *= v.card;
  }
  return n;
}

kernels::Strides strides_of(const std::vector<Variable>& vars) {
  kernels::Strides s(vars.size());
  std::size_t step = 1;
  for (std::size_t d = vars.size(); d-- > 0;) {
    s[d] = step;
    step *= vars[d].card;
  }
  return s;
}

kernels::Cards cards_of(const std::vector<Variable>& vars) {
  kernels::Cards c;
  for (const auto& v : vars) c.push_back(v.card);
  return c;
}

// Variables of x followed by those of y that x lacks.
std::vector<Variable> merged(const Factor& x, const Factor& y) {
  std::vector<Variable> out = x.variables();
  for (const auto& v : y.variables()) {
    if (x.has(v.name)) {
      if (x.card(v.name) != v.card) throw Error(ErrorCode::mismatch, "cardinality of " + v.name + " differs");
    } else {
      out.push_back(v);
    }
  }
  return out;
}

kernels::Strides project_strides(const std::vector<Variable>& out, const Factor& f) {
  const auto own = strides_of(f.variables());
  kernels::Strides s(out.size(), 0);
  for (std::size_t d = 0; d < out.size(); ++d)
    if (f.has(out[d].name)) s[d] = own[f.position(out[d].name)];
  return s;
}

bool contains(const VertexSet& s, std::string_view x) { return std::find(s.begin(), s.end(), x) != s.end(); }

}  // namespace

std::string describe(const Assignment& a) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, v] : a) {
    out << (first ? "" : ", ") << k << '=' << v;
    first = false;
  }
  return out.str();
}

Factor::Factor(std::vector<Variable> vars, std::vector<double> table) : vars_(std::move(vars)), table_(std::move(table)) {
  std::set<std::string> seen;
  for (const auto& v : vars_)
    if (!seen.insert(v.name).second) throw Error(ErrorCode::malformed, "duplicate variable " + v.name);
  const std::size_t n = checked_cells(vars_);
  if (table_.size() != n) {
    throw Error(ErrorCode::malformed, "table has " + std::to_string(table_.size()) + " cells, expected " +
                                          std::to_string(n));
  }
  for (double x : table_)
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorCode::malformed, "table entries must be finite and >= 0");
}

Factor Factor::constant(double value) { return Factor({}, {value}); }

Factor Factor::uniform(std::vector<Variable> vars) {
  const std::size_t n = checked_cells(vars);
  return Factor(std::move(vars), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

VertexSet Factor::names() const {
  VertexSet out;
  for (const auto& v : vars_) out.push_back(v.name);
  return out;
}

bool Factor::has(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.name == name; });
}

std::size_t Factor::position(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return i;
  throw Error(ErrorCode::unknown_variable, std::string(name));
}

double Factor::at(const Assignment& a) const {
  std::size_t idx = 0;
  for (const auto& v : vars_) {
    auto it = a.find(v.name);
    if (it == a.end()) throw Error(ErrorCode::unknown_variable, "no value for " + v.name);
    if (it->second < 0 || static_cast<std::size_t>(it->second) >= v.card)
      throw Error(ErrorCode::invalid_argument, "value out of range for " + v.name);
    idx = idx * v.card + static_cast<std::size_t>(it->second);
  }
  return table_[idx];
}

Assignment Factor::assignment(std::size_t cell) const {
  Assignment a;
  for (std::size_t d = vars_.size(); d-- > 0;) {
    a[vars_[d].name] = static_cast<int>(cell % vars_[d].card);
    cell /= vars_[d].card;
  }
  return a;
}

Factor Factor::sum_out(const VertexSet& names) const {
  if (names.empty()) return *this;
  std::vector<bool> keep(vars_.size(), true);
  for (const auto& n : names) keep[position(n)] = false;
  std::vector<Variable> out_vars;
  for (std::size_t d = 0; d < vars_.size(); ++d)
    if (keep[d]) out_vars.push_back(vars_[d]);
  return Factor(std::move(out_vars), kernels::sum_out(cards_of(vars_), keep, table_.data()));
}

Factor Factor::keep_only(const VertexSet& names) const {
  for (const auto& n : names) position(n);
  VertexSet drop;
  for (const auto& v : vars_)
    if (!contains(names, v.name)) drop.push_back(v.name);
  return sum_out(drop);
}

Factor Factor::average_out(const VertexSet& names) const {
  Factor out = sum_out(names);
  double count = 1.0;
  for (const auto& n : names) count *= static_cast<double>(card(n));
  for (double& x : out.table_) x /= count;
  return out;
}

Factor Factor::restrict(const Assignment& a) const {
  std::vector<Variable> out_vars;
  const auto strides = strides_of(vars_);
  std::size_t base = 0;
  kernels::Cards cards;
  kernels::Strides out_strides;
  for (std::size_t d = 0; d < vars_.size(); ++d) {
    auto it = a.find(vars_[d].name);
    if (it == a.end()) {
      out_vars.push_back(vars_[d]);
      cards.push_back(vars_[d].card);
      out_strides.push_back(strides[d]);
    } else {
      if (it->second < 0 || static_cast<std::size_t>(it->second) >= vars_[d].card)
        throw Error(ErrorCode::invalid_argument, "value out of range for " + vars_[d].name);
      base += static_cast<std::size_t>(it->second) * strides[d];
    }
  }
  const std::size_t n = kernels::cell_count(cards);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i, off = base;
    for (std::size_t d = cards.size(); d-- > 0;) {
      off += (rest % cards[d]) * out_strides[d];
      rest /= cards[d];
    }
    out[i] = table_[off];
  }
  return Factor(std::move(out_vars), std::move(out));
}

Factor Factor::reorder(const VertexSet& order) const {
  if (order.size() != vars_.size()) throw Error(ErrorCode::mismatch, "reorder needs a permutation");
  std::vector<Variable> out_vars;
  for (const auto& n : order) out_vars.push_back(vars_[position(n)]);
  auto r = kernels::combine(cards_of(out_vars), project_strides(out_vars, *this), table_.data(),
                            kernels::Strides(out_vars.size(), 0), Factor::constant(1.0).table_.data(),
                            kernels::BinaryOp::multiply);
  return Factor(std::move(out_vars), std::move(r.values));
}

double Factor::total() const { return sum_out(names()).table_[0]; }

Factor multiply(const Factor& x, const Factor& y) {
  auto vars = merged(x, y);
  checked_cells(vars);
  auto r = kernels::combine(cards_of(vars), project_strides(vars, x), x.table_.data(), project_strides(vars, y),
                            y.table_.data(), kernels::BinaryOp::multiply);
  return Factor(std::move(vars), std::move(r.values));
}

Factor divide(const Factor& x, const Factor& y, ZeroPolicy policy) {
  auto vars = merged(x, y);
  checked_cells(vars);
  const auto op =
      policy == ZeroPolicy::strict ? kernels::BinaryOp::divide_strict : kernels::BinaryOp::divide_allow_zeros;
  auto r = kernels::combine(cards_of(vars), project_strides(vars, x), x.table_.data(), project_strides(vars, y),
                            y.table_.data(), op);
  Factor out(std::move(vars), std::move(r.values));
  if (r.bad_cell >= 0) {
    throw Error(ErrorCode::positivity,
                "division by zero probability at " + describe(out.assignment(static_cast<std::size_t>(r.bad_cell))));
  }
  return out;
}

TabularDist::TabularDist(Factor f, VertexSet conditioning) : f_(std::move(f)) {
  for (const auto& c : conditioning)
    if (!f_.has(c)) throw Error(ErrorCode::unknown_variable, "conditioning variable " + c);
  // Keep the conditioning list in factor order so equality is structural.
  for (const auto& v : f_.variables())
    if (contains(conditioning, v.name)) cond_.push_back(v.name);
}

TabularDist TabularDist::checked(Factor f, VertexSet conditioning, double tol) {
  TabularDist d(std::move(f), std::move(conditioning));
  const double err = d.normalization_error();
  if (err > tol) {
    throw Error(ErrorCode::malformed, "distribution is not normalized (max deviation " + std::to_string(err) + ")");
  }
  return d;
}

VertexSet TabularDist::random() const {
  VertexSet out;
  for (const auto& v : f_.variables())
    if (!is_context(v.name)) out.push_back(v.name);
  return out;
}

bool TabularDist::is_context(std::string_view name) const { return contains(cond_, name); }

TabularDist TabularDist::marginalize(const VertexSet& s) const {
  for (const auto& v : s) {
    if (!f_.has(v)) throw Error(ErrorCode::unknown_variable, v);
    if (is_context(v)) throw Error(ErrorCode::unknown_variable, v + " is a context variable");
  }
  return TabularDist(f_.sum_out(s), cond_);
}

TabularDist TabularDist::condition(const VertexSet& s, ZeroPolicy policy) const {
  for (const auto& v : s) {
    if (!f_.has(v)) throw Error(ErrorCode::unknown_variable, v);
    if (is_context(v)) throw Error(ErrorCode::unknown_variable, v + " is already a context variable");
  }
  if (s.empty()) return *this;
  VertexSet rest;
  for (const auto& v : random())
    if (!contains(s, v)) rest.push_back(v);
  const Factor margin = f_.sum_out(rest);
  VertexSet cond = cond_;
  cond.insert(cond.end(), s.begin(), s.end());
  return TabularDist(sgid::divide(f_, margin, policy), cond);
}

TabularDist TabularDist::restrict(const Assignment& a) const {
  VertexSet cond;
  for (const auto& [k, v] : a) {
    if (!f_.has(k)) throw Error(ErrorCode::unknown_variable, k);
    if (!is_context(k)) throw Error(ErrorCode::invalid_argument, "cannot restrict random variable " + k);
  }
  for (const auto& c : cond_)
    if (!a.count(c)) cond.push_back(c);
  return TabularDist(f_.restrict(a), cond);
}

TabularDist TabularDist::product(const TabularDist& other) const {
  const VertexSet r1 = random(), r2 = other.random();
  for (const auto& v : r2)
    if (contains(r1, v)) throw Error(ErrorCode::invalid_argument, "kernel product with shared random variable " + v);
  Factor f = multiply(f_, other.f_);
  VertexSet cond;
  for (const auto& n : f.names())
    if (!contains(r1, n) && !contains(r2, n)) cond.push_back(n);
  return TabularDist(std::move(f), cond);
}

TabularDist TabularDist::divide(const TabularDist& other, ZeroPolicy policy) const {
  const VertexSet r1 = random(), r2 = other.random();
  Factor f = sgid::divide(f_, other.f_, policy);
  VertexSet cond;
  for (const auto& n : f.names())
    if (!contains(r1, n) || contains(r2, n)) cond.push_back(n);
  return TabularDist(std::move(f), cond);
}

TabularDist TabularDist::drop_context(const VertexSet& s) const {
  for (const auto& v : s)
    if (!is_context(v)) throw Error(ErrorCode::unknown_variable, v + " is not a context variable");
  VertexSet cond;
  for (const auto& c : cond_)
    if (!contains(s, c)) cond.push_back(c);
  if (s.empty()) return *this;
  // Rows of the kernel that a zero-tolerant division left undefined carry no
  // mass; average only over the context values whose row is defined. Under
  // positivity every row is defined and this is the plain average.
  Factor defined = f_.keep_only(cond_);
  for (double& x : defined.mutable_table()) x = x > 0.0 ? 1.0 : 0.0;
  return TabularDist(sgid::divide(f_.sum_out(s), defined.sum_out(s), ZeroPolicy::allow_zeros), cond);
}

TabularDist TabularDist::reorder(const VertexSet& order) const { return TabularDist(f_.reorder(order), cond_); }

double TabularDist::normalization_error(bool skip_zero_rows) const {
  const Factor totals = f_.sum_out(random());
  double worst = 0.0;
  for (double t : totals.table()) {
    if (skip_zero_rows && t == 0.0) continue;
    worst = std::max(worst, std::abs(t - 1.0));
  }
  return worst;
}

TabularDist parse_dist(std::string_view json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    std::vector<Variable> vars;
    for (const auto& v : doc.at("variables")) vars.push_back({v.at("name").get<std::string>(), v.at("card").get<std::size_t>()});
    VertexSet cond = doc.value("conditioning", VertexSet{});
    auto table = doc.at("table").get<std::vector<double>>();
    return TabularDist::checked(Factor(std::move(vars), std::move(table)), std::move(cond));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed, e.what());
  }
}

std::string dist_to_json(const TabularDist& d, int indent) {
  nlohmann::json doc;
  doc["variables"] = nlohmann::json::array();
  for (const auto& v : d.factor().variables()) doc["variables"].push_back({{"name", v.name}, {"card", v.card}});
  doc["conditioning"] = d.conditioning();
  doc["table"] = d.factor().table();
  return doc.dump(indent);
}

}  // namespace sgid
