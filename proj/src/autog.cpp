#include "sgid/autog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "json.hpp"
#include "sgid/error.hpp"

namespace sgid {

std::vector<std::size_t> maximal_independent_set(const Adjacency& adj, std::size_t restarts, std::uint64_t seed) {
  if (restarts == 0) throw Error(ErrorCode::invalid_argument, "restarts must be at least 1");
  const std::size_t n = adj.size();
  std::vector<std::size_t> best;
  Rng rng(seed);
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), 0);
    std::shuffle(rank.begin(), rank.end(), rng);
    std::vector<std::size_t> degree(n);
    std::vector<char> alive(n, 1);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> queue;
    for (std::size_t v = 0; v < n; ++v) {
      degree[v] = adj.neighbors[v].size();
      queue.emplace(degree[v], rank[v], v);
    }
    auto remove = [&](std::size_t v) {
      alive[v] = 0;
      queue.erase({degree[v], rank[v], v});
      for (std::size_t w : adj.neighbors[v]) {
        if (!alive[w]) continue;
        queue.erase({degree[w], rank[w], w});
        --degree[w];
        queue.emplace(degree[w], rank[w], w);
      }
    };
    std::vector<std::size_t> chosen;
    while (!queue.empty()) {
      const std::size_t v = std::get<2>(*queue.begin());
      chosen.push_back(v);
      std::vector<std::size_t> drop{v};
      for (std::size_t w : adj.neighbors[v])
        if (alive[w]) drop.push_back(w);
      for (std::size_t w : drop)
        if (alive[w]) remove(w);
    }
    if (chosen.size() > best.size()) best = std::move(chosen);
  }
  std::sort(best.begin(), best.end());
  return best;
}

bool is_independent_set(const Adjacency& adj, const std::vector<std::size_t>& s) {
  std::vector<char> in(adj.size(), 0);
  for (std::size_t v : s) {
    if (v >= adj.size() || in[v]) return false;
    in[v] = 1;
  }
  for (std::size_t v : s)
    for (std::size_t w : adj.neighbors[v])
      if (in[w]) return false;
  return true;
}

bool is_maximal_independent_set(const Adjacency& adj, const std::vector<std::size_t>& s) {
  if (!is_independent_set(adj, s)) return false;
  std::vector<char> covered(adj.size(), 0);
  for (std::size_t v : s) {
    covered[v] = 1;
    for (std::size_t w : adj.neighbors[v]) covered[w] = 1;
  }
  return std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; });
}

namespace {

constexpr double kCap = 15.0;
constexpr double kTol = 1e-8;
constexpr std::size_t kMaxIter = 100;

double loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(1 + e^η) computed stably.
    const double e = eta[i];
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y[i] * e - softplus;
  }
  return ll;
}

}  // namespace

LogisticFit fit_logistic(const std::vector<std::vector<double>>& rows, const std::vector<int>& y) {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "empty subset");
  if (rows.size() != y.size()) throw Error(ErrorCode::mismatch, "rows and responses differ in length");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    yy[i] = y[static_cast<std::size_t>(i)];
  }

  LogisticFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double ll = loglik(x, yy, beta);
  fit.loglik_trace.push_back(ll);
  Eigen::VectorXd grad(k);
  for (fit.iterations = 0; fit.iterations < kMaxIter; ++fit.iterations) {
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = expit(x.row(i).dot(beta));
    grad = x.transpose() * (yy - p);
    if (grad.lpNorm<Eigen::Infinity>() <= kTol) break;
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).matrix();
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = h.ldlt().solve(grad);

    double scale = 1.0;
    bool accepted = false;
    Eigen::VectorXd next;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      next = beta + scale * step;
      if (next.lpNorm<Eigen::Infinity>() > kCap) {
        next = next.cwiseMax(-kCap).cwiseMin(kCap);
        fit.separated = true;
      }
      const double cand = loglik(x, yy, next);
      if (cand >= ll) {
        ll = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted || (next - beta).lpNorm<Eigen::Infinity>() == 0.0) break;
    beta = next;
    fit.loglik_trace.push_back(ll);
  }
  {
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = expit(x.row(i).dot(beta));
    fit.gradient_norm = (x.transpose() * (yy - p)).lpNorm<Eigen::Infinity>();
  }
  fit.beta.assign(beta.data(), beta.data() + k);
  return fit;
}

const char* to_string(FitMethod m) { return m == FitMethod::coding ? "coding" : "pseudo"; }

FitMethod parse_fit_method(std::string_view text) {
  if (text == "coding") return FitMethod::coding;
  if (text == "pseudo") return FitMethod::pseudo;
  throw Error(ErrorCode::invalid_argument, "unknown estimator " + std::string(text));
}

std::vector<double> unit_features(const Dataset& d, Target target, std::size_t i) {
  std::vector<double> f{1.0};
  const auto& c = d.c[i];
  int sa = 0, sm = 0;
  for (std::size_t j : d.adjacency.neighbors[i]) {
    sa += d.a[j];
    sm += d.m[j];
  }
  switch (target) {
    case Target::A: f.insert(f.end(), c.begin(), c.end()); break;
    case Target::M:
      f.push_back(d.a[i]);
      f.insert(f.end(), c.begin(), c.end());
      f.push_back(sa);
      f.push_back(sm);
      break;
    case Target::Y:
      f.insert(f.end(), c.begin(), c.end());
      f.push_back(d.a[i]);
      f.push_back(sa);
      f.push_back(d.m[i]);
      break;
  }
  return f;
}

LogisticFit fit_unit_logistic(const Dataset& d, Target target, const std::vector<std::size_t>& subset) {
  if (subset.empty()) throw Error(ErrorCode::invalid_argument, "empty subset");
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  rows.reserve(subset.size());
  for (std::size_t i : subset) {
    rows.push_back(unit_features(d, target, i));
    y.push_back(target == Target::A ? d.a[i] : target == Target::M ? d.m[i] : d.y[i]);
  }
  return fit_logistic(rows, y);
}

FittedModels fit_models(const Dataset& d, FitMethod method, std::size_t mis_restarts, std::uint64_t seed) {
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), 0);
  FittedModels fm;
  fm.method = method;
  const auto fa = fit_unit_logistic(d, Target::A, all);
  const auto fy = fit_unit_logistic(d, Target::Y, all);
  std::vector<std::size_t> subset = all;
  if (method == FitMethod::coding) {
    fm.mis = maximal_independent_set(d.adjacency, mis_restarts, seed);
    subset = fm.mis;
  }
  const auto fmm = fit_unit_logistic(d, Target::M, subset);
  fm.a_model = fa.beta;
  fm.m_model = fmm.beta;
  fm.y_model = fy.beta;
  fm.separated = fa.separated || fy.separated || fmm.separated;
  return fm;
}

std::vector<std::vector<int>> gibbs_sample_m(const FittedModels& models, const Adjacency& adj,
                                             const std::vector<std::vector<double>>& c, const std::vector<int>& a,
                                             std::size_t samples, std::size_t burnin, std::size_t chains,
                                             std::uint64_t seed) {
  if (chains == 0) throw Error(ErrorCode::invalid_argument, "chains must be at least 1");
  std::vector<std::vector<int>> out(samples);
  std::vector<std::size_t> start(chains + 1, 0);
  for (std::size_t k = 0; k < chains; ++k) start[k + 1] = start[k] + samples / chains + (k < samples % chains ? 1 : 0);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < chains; ++k) {
    Rng rng(derive_seed(seed, k));
    std::vector<int> m(adj.size());
    for (auto& x : m) x = bernoulli(rng, 0.5) ? 1 : 0;
    for (std::size_t s = 0; s < burnin; ++s) gibbs_sweep(adj, models.m_model, c, a, m, rng);
    for (std::size_t s = start[k]; s < start[k + 1]; ++s) {
      gibbs_sweep(adj, models.m_model, c, a, m, rng);
      out[s] = m;
    }
  }
  return out;
}

EffectEstimate network_effect_from_models(const Dataset& d, const FittedModels& models, const McSettings& mc,
                                          std::uint64_t seed) {
  const std::size_t n = d.size();
  const std::size_t p = d.c.empty() ? 0 : d.c.front().size();
  const auto& ay = models.y_model;  // (α0, α_C, α_A, α_A_nb, α_M)
  const auto& aa = models.a_model;  // (γ0, γ_C)
  std::vector<double> p_a1(n), base(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta_a = aa[0], eta_y = ay[0];
    for (std::size_t l = 0; l < p; ++l) {
      eta_a += aa[1 + l] * d.c[i][l];
      eta_y += ay[1 + l] * d.c[i][l];
    }
    p_a1[i] = expit(eta_a);
    base[i] = eta_y;
  }
  const double alpha_a = ay[1 + p], alpha_nb = ay[2 + p], alpha_m = ay[3 + p];

  double mean[2] = {0.0, 0.0};
  for (int level = 1; level >= 0; --level) {
    const std::vector<int> a(n, level);
    const auto fields = gibbs_sample_m(models, d.adjacency, d.c, a, mc.samples, mc.burnin, mc.chains,
                                       derive_seed(seed, static_cast<std::uint64_t>(level)));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double nb = alpha_nb * static_cast<double>(d.adjacency.neighbors[i].size()) * level;
      double unit = 0.0;
      for (const auto& m : fields) {
        const double eta = base[i] + nb + alpha_m * m[i];
        unit += expit(eta + alpha_a) * p_a1[i] + expit(eta) * (1.0 - p_a1[i]);
      }
      total += fields.empty() ? 0.0 : unit / static_cast<double>(fields.size());
    }
    mean[level] = total / static_cast<double>(n);
  }
  EffectEstimate e;
  e.mean_y1 = mean[1];
  e.mean_y0 = mean[0];
  e.ne = mean[1] - mean[0];
  e.method = models.method;
  e.mc = mc;
  e.seed = seed;
  e.models = models;
  return e;
}

EffectEstimate estimate_network_effect(const Dataset& d, FitMethod method, const McSettings& mc, std::uint64_t seed) {
  const FittedModels models = fit_models(d, method, mc.mis_restarts, derive_seed(seed, 100));
  return network_effect_from_models(d, models, mc, derive_seed(seed, 200));
}

std::string estimate_to_json(const EffectEstimate& e, int indent) {
  nlohmann::json doc{{"ne", e.ne},
                     {"mean_y1", e.mean_y1},
                     {"mean_y0", e.mean_y0},
                     {"method", to_string(e.method)},
                     {"mc_samples", e.mc.samples},
                     {"burnin", e.mc.burnin},
                     {"chains", e.mc.chains},
                     {"seed", e.seed},
                     {"a_model", e.models.a_model},
                     {"m_model", e.models.m_model},
                     {"y_model", e.models.y_model},
                     {"separated", e.models.separated}};
  if (e.method == FitMethod::coding) doc["mis"] = e.models.mis;
  return doc.dump(indent);
}

}  // namespace sgid
