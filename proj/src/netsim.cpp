#include "sgid/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sgid/error.hpp"

namespace sgid {

std::size_t Adjacency::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : neighbors) twice += nb.size();
  return twice / 2;
}

Adjacency adjacency_from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Adjacency adj;
  adj.neighbors.resize(n);
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) throw Error(ErrorCode::invalid_argument, "edge endpoint out of range");
    if (i == j) throw Error(ErrorCode::self_loop, "unit " + std::to_string(i));
    adj.neighbors[i].push_back(j);
    adj.neighbors[j].push_back(i);
  }
  for (auto& nb : adj.neighbors) {
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end()) throw Error(ErrorCode::duplicate_edge, "repeated edge");
  }
  return adj;
}

bool is_connected(const Adjacency& adj) {
  if (adj.size() == 0) return true;
  std::vector<char> seen(adj.size(), 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : adj.neighbors[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        queue.push_back(w);
      }
    }
  }
  return count == adj.size();
}

bool is_simple(const Adjacency& adj) {
  for (std::size_t i = 0; i < adj.size(); ++i) {
    const auto& nb = adj.neighbors[i];
    if (!std::is_sorted(nb.begin(), nb.end()) || std::adjacent_find(nb.begin(), nb.end()) != nb.end()) return false;
    for (std::size_t j : nb) {
      if (j == i || j >= adj.size()) return false;
      if (!std::binary_search(adj.neighbors[j].begin(), adj.neighbors[j].end(), i)) return false;
    }
  }
  return true;
}

std::string adjacency_to_json(const Adjacency& adj, int indent) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (std::size_t j : adj.neighbors[i])
      if (i < j) edges.push_back({i, j});
  return nlohmann::json{{"n", adj.size()}, {"edges", edges}}.dump(indent);
}

Adjacency parse_adjacency(std::string_view json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    return adjacency_from_edges(doc.at("n").get<std::size_t>(), edges);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed, e.what());
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double expit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool bernoulli(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

double beta_draw(Rng& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  return x / (x + y);
}

Adjacency random_regular_graph(std::size_t n, std::size_t degree, std::uint64_t seed) {
  if ((n * degree) % 2 != 0) throw Error(ErrorCode::invalid_argument, "n * degree must be even");
  if (degree >= n) throw Error(ErrorCode::invalid_argument, "degree must be smaller than n");
  Rng rng(seed);
  std::vector<std::size_t> points(n * degree);
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = i / degree;
  for (std::size_t attempt = 0; attempt < 100000; ++attempt) {
    std::shuffle(points.begin(), points.end(), rng);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    bool simple = true;
    for (std::size_t k = 0; k < points.size() && simple; k += 2) {
      auto [i, j] = std::minmax(points[k], points[k + 1]);
      if (i == j || !seen.emplace(i, j).second) simple = false;
      edges.emplace_back(i, j);
    }
    if (!simple) continue;
    Adjacency adj = adjacency_from_edges(n, edges);
    if (is_connected(adj)) return adj;
  }
  throw Error(ErrorCode::cap_exceeded, "no simple connected pairing found");
}

void NetworkModel::validate() const {
  if (tau_a.size() != 1 + p() + q()) throw Error(ErrorCode::invalid_argument, "tau_a must have 1 + p + q entries");
  if (tau_m.size() != 2 + p() + 2) throw Error(ErrorCode::invalid_argument, "tau_m must have 4 + p entries");
  if (tau_y.size() != 1 + p() + q() + 2) throw Error(ErrorCode::invalid_argument, "tau_y must have 3 + p + q entries");
  if (!is_simple(adjacency)) throw Error(ErrorCode::invalid_argument, "adjacency must be simple and symmetric");
}

NetworkModel reference_model(Adjacency adjacency) {
  NetworkModel m;
  m.adjacency = std::move(adjacency);
  m.c_params = {{1.5, 3.0}, {6.0, 2.0}, {0.8, 0.8}};
  m.u_params = {{2.3, 1.1}, {0.9, 1.1}, {2.0, 2.0}};
  m.tau_a = {-1.0, 0.5, 0.2, 0.25, 0.3, -0.2, 0.25};
  m.tau_m = {-1.0, -0.3, 0.4, 0.1, 1.0, -0.5, -1.5};
  m.tau_y = {-0.3, -0.2, 0.2, -0.05, 0.1, -0.2, 0.25, -1.0, 3.0};
  return m;
}

void gibbs_sweep(const Adjacency& adj, const std::vector<double>& beta, const std::vector<std::vector<double>>& c,
                 const std::vector<int>& a, std::vector<int>& m, Rng& rng) {
  const std::size_t p = beta.size() - 4;
  const double b_anb = beta[2 + p], b_mnb = beta[3 + p];
  for (std::size_t i = 0; i < adj.size(); ++i) {
    double eta = beta[0] + beta[1] * a[i];
    for (std::size_t l = 0; l < p; ++l) eta += beta[2 + l] * c[i][l];
    int sa = 0, sm = 0;
    for (std::size_t j : adj.neighbors[i]) {
      sa += a[j];
      sm += m[j];
    }
    eta += b_anb * sa + b_mnb * sm;
    m[i] = bernoulli(rng, expit(eta)) ? 1 : 0;
  }
}

namespace {

void draw_covariates(const NetworkModel& model, Rng& rng, std::vector<std::vector<double>>& c,
                     std::vector<std::vector<double>>& u) {
  const std::size_t n = model.adjacency.size();
  c.assign(n, std::vector<double>(model.p()));
  u.assign(n, std::vector<double>(model.q()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < model.p(); ++l) c[i][l] = beta_draw(rng, model.c_params[l].a, model.c_params[l].b);
    for (std::size_t l = 0; l < model.q(); ++l) u[i][l] = beta_draw(rng, model.u_params[l].a, model.u_params[l].b);
  }
}

std::vector<int> run_field(const NetworkModel& model, const std::vector<std::vector<double>>& c,
                           const std::vector<int>& a, std::size_t sweeps, Rng& rng) {
  std::vector<int> m(model.adjacency.size());
  for (auto& x : m) x = bernoulli(rng, 0.5) ? 1 : 0;
  for (std::size_t s = 0; s < sweeps; ++s) gibbs_sweep(model.adjacency, model.tau_m, c, a, m, rng);
  return m;
}

std::vector<int> draw_outcomes(const NetworkModel& model, const std::vector<std::vector<double>>& c,
                               const std::vector<std::vector<double>>& u, const std::vector<int>& a,
                               const std::vector<int>& m, Rng& rng) {
  const std::size_t p = model.p(), q = model.q();
  const auto& t = model.tau_y;
  std::vector<int> y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double eta = t[0];
    for (std::size_t l = 0; l < p; ++l) eta += t[1 + l] * c[i][l];
    for (std::size_t l = 0; l < q; ++l) eta += t[1 + p + l] * u[i][l];
    int sa = 0;
    for (std::size_t j : model.adjacency.neighbors[i]) sa += a[j];
    eta += t[1 + p + q] * sa + t[2 + p + q] * m[i];
    y[i] = bernoulli(rng, expit(eta)) ? 1 : 0;
  }
  return y;
}

}  // namespace

Dataset generate_dataset(const NetworkModel& model, std::size_t gibbs_iters, std::size_t burnin, std::uint64_t seed,
                         bool keep_hidden) {
  model.validate();
  Rng rng(seed);
  Dataset d;
  d.adjacency = model.adjacency;
  std::vector<std::vector<double>> u;
  draw_covariates(model, rng, d.c, u);
  const std::size_t n = model.adjacency.size(), p = model.p(), q = model.q();
  d.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = model.tau_a[0];
    for (std::size_t l = 0; l < p; ++l) eta += model.tau_a[1 + l] * d.c[i][l];
    for (std::size_t l = 0; l < q; ++l) eta += model.tau_a[1 + p + l] * u[i][l];
    d.a[i] = bernoulli(rng, expit(eta)) ? 1 : 0;
  }
  d.m = run_field(model, d.c, d.a, burnin + gibbs_iters, rng);
  d.y = draw_outcomes(model, d.c, u, d.a, d.m, rng);
  if (keep_hidden) d.u = std::move(u);
  return d;
}

GroundTruth ground_truth_ne(const NetworkModel& model, std::size_t reps, std::size_t gibbs_iters, std::size_t burnin,
                            std::uint64_t seed) {
  if (reps == 0) throw Error(ErrorCode::invalid_argument, "reps must be at least 1");
  model.validate();
  const std::size_t n = model.adjacency.size();
  std::vector<double> diffs(reps);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < reps; ++r) {
    const std::uint64_t rep_seed = derive_seed(seed, r);
    Rng cov_rng(derive_seed(rep_seed, 0));
    std::vector<std::vector<double>> c, u;
    draw_covariates(model, cov_rng, c, u);
    double mean_y[2] = {0.0, 0.0};
    for (int arm = 0; arm < 2; ++arm) {
      Rng rng(derive_seed(rep_seed, 1 + static_cast<std::uint64_t>(arm)));
      const std::vector<int> a(n, arm);
      const auto m = run_field(model, c, a, burnin + gibbs_iters, rng);
      const auto y = draw_outcomes(model, c, u, a, m, rng);
      mean_y[arm] = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    }
    diffs[r] = mean_y[1] - mean_y[0];
  }
  GroundTruth gt;
  gt.reps = reps;
  gt.ne = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(reps);
  if (reps > 1) {
    double ss = 0.0;
    for (double d : diffs) ss += (d - gt.ne) * (d - gt.ne);
    gt.se = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
  }
  return gt;
}

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream out;
  out.precision(17);
  const std::size_t p = d.c.empty() ? 0 : d.c.front().size();
  out << "unit";
  for (std::size_t l = 0; l < p; ++l) out << ",C" << (l + 1);
  out << ",A,M,Y\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << i;
    for (std::size_t l = 0; l < p; ++l) out << ',' << d.c[i][l];
    out << ',' << d.a[i] << ',' << d.m[i] << ',' << d.y[i] << '\n';
  }
  return out.str();
}

Dataset parse_dataset_csv(std::string_view text, const Adjacency& adjacency) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  Dataset d;
  d.adjacency = adjacency;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  std::vector<std::size_t> c_cols;
  std::size_t col_unit = 0, col_a = 0, col_m = 0, col_y = 0;
  std::vector<std::vector<double>> c(adjacency.size());
  std::vector<int> a(adjacency.size(), -1), m(adjacency.size(), -1), y(adjacency.size(), -1);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      bool has_unit = false, has_a = false, has_m = false, has_y = false;
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& h = cells[k];
        if (h == "unit") col_unit = k, has_unit = true;
        else if (h == "A") col_a = k, has_a = true;
        else if (h == "M") col_m = k, has_m = true;
        else if (h == "Y") col_y = k, has_y = true;
        else if (h.size() > 1 && h[0] == 'C') c_cols.push_back(k);
      }
      if (!has_unit || !has_a || !has_m || !has_y) throw Error(ErrorCode::malformed, "data header needs unit, A, M, Y");
      continue;
    }
    if (cells.size() != header.size()) throw Error(ErrorCode::malformed, "ragged row: " + line);
    try {
      const std::size_t i = std::stoul(cells[col_unit]);
      if (i >= adjacency.size()) throw Error(ErrorCode::mismatch, "unit " + cells[col_unit] + " not in network");
      c[i].clear();
      for (std::size_t k : c_cols) c[i].push_back(std::stod(cells[k]));
      a[i] = std::stoi(cells[col_a]);
      m[i] = std::stoi(cells[col_m]);
      y[i] = std::stoi(cells[col_y]);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::malformed, "bad number in row: " + line);
    }
  }
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    if (a[i] < 0) throw Error(ErrorCode::mismatch, "no data row for unit " + std::to_string(i));
    for (int v : {a[i], m[i], y[i]})
      if (v != 0 && v != 1) throw Error(ErrorCode::malformed, "binary column outside {0,1}");
  }
  d.c = std::move(c);
  d.a = std::move(a);
  d.m = std::move(m);
  d.y = std::move(y);
  return d;
}

}  // namespace sgid
