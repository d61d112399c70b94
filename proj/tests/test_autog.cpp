#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgid/autog.hpp"
#include "sgid/error.hpp"
#include "sgid/experiment.hpp"
#include "sgid/netsim.hpp"

using namespace sgid;

namespace {

std::vector<std::size_t> all_units(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Standard errors from the inverse observed Fisher information of the M
// logistic model at `beta`, over every unit.
std::vector<double> m_standard_errors(const Dataset& d, const std::vector<double>& beta) {
  const auto k = static_cast<Eigen::Index>(beta.size());
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto f = unit_features(d, Target::M, i);
    Eigen::VectorXd x(k);
    double eta = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      x[j] = f[static_cast<std::size_t>(j)];
      eta += beta[static_cast<std::size_t>(j)] * x[j];
    }
    const double p = 1.0 / (1.0 + std::exp(-eta));
    info += p * (1.0 - p) * x * x.transpose();
  }
  const Eigen::MatrixXd cov = info.inverse();
  std::vector<double> se(beta.size());
  for (Eigen::Index j = 0; j < k; ++j) se[static_cast<std::size_t>(j)] = std::sqrt(cov(j, j));
  return se;
}

double sample_sd(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

Adjacency edgeless(std::size_t n) { return Adjacency{std::vector<std::vector<std::size_t>>(n)}; }

}  // namespace

TEST_CASE("maximal independent sets") {
  const auto empty = maximal_independent_set(edgeless(7), 3, 1);
  CHECK(empty == all_units(7));

  const auto k4 = maximal_independent_set(random_regular_graph(4, 3, 1), 10, 1);
  CHECK(k4.size() == 1);

  const Adjacency g = random_regular_graph(400, 3, 7);
  const auto s = maximal_independent_set(g, 50, 1);
  CHECK(s.size() >= 150);
  CHECK(is_maximal_independent_set(g, s));
  CHECK(maximal_independent_set(g, 50, 1) == s);
  CHECK_THROWS_AS(maximal_independent_set(g, 0, 1), Error);
}

TEST_CASE("every MIS is independent and maximal") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 20 + 10 * (seed % 5);
    const Adjacency g = random_regular_graph(n, 2 + seed % 4, seed);
    const auto s = maximal_independent_set(g, 1 + seed % 7, seed);
    CHECK(is_independent_set(g, s));
    CHECK(is_maximal_independent_set(g, s));
  }
  const Adjacency path = adjacency_from_edges(3, {{0, 1}, {1, 2}});
  CHECK_FALSE(is_independent_set(path, {0, 1}));
  CHECK(is_independent_set(path, {1}));
  CHECK(is_maximal_independent_set(path, {1}));
  CHECK_FALSE(is_maximal_independent_set(path, {0}));
}

TEST_CASE("Newton iterations never decrease the log-likelihood") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    const std::size_t n = 50 + 20 * t;
    for (std::size_t i = 0; i < n; ++i) {
      const double x1 = z(rng), x2 = z(rng);
      rows.push_back({1.0, x1, x2});
      y.push_back(std::bernoulli_distribution(1.0 / (1.0 + std::exp(-(0.3 + 2.0 * x1 - x2))))(rng) ? 1 : 0);
    }
    const LogisticFit fit = fit_logistic(rows, y);
    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k) CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1]);
    CHECK((fit.gradient_norm <= 1e-8 || fit.separated));
  }
}

TEST_CASE("perfect separation is reported with capped coefficients") {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    rows.push_back({1.0, static_cast<double>(i)});
    y.push_back(i > 0 ? 1 : 0);
  }
  const LogisticFit fit = fit_logistic(rows, y);
  CHECK(fit.separated);
  for (double b : fit.beta) CHECK(std::abs(b) <= 15.0);
  CHECK_THROWS_AS(fit_logistic({}, {}), Error);
}

TEST_CASE("feature layouts") {
  const NetworkModel m = reference_model(random_regular_graph(10, 3, 1));
  const Dataset d = generate_dataset(m, 1, 10, 2);
  CHECK(unit_features(d, Target::A, 0).size() == 4);
  CHECK(unit_features(d, Target::M, 0).size() == 7);
  CHECK(unit_features(d, Target::Y, 0).size() == 7);
  const auto fy = unit_features(d, Target::Y, 3);
  CHECK(fy[4] == d.a[3]);
  CHECK(fy[6] == d.m[3]);
  CHECK_THROWS_AS(fit_unit_logistic(d, Target::M, {}), Error);
}

TEST_CASE("a decoupled M field is ordinary logistic regression") {
  NetworkModel m = reference_model(random_regular_graph(2000, 3, 5));
  m.tau_m[5] = 0.0;
  m.tau_m[6] = 0.0;
  const Dataset d = generate_dataset(m, 1, 100, 17);
  const LogisticFit fit = fit_unit_logistic(d, Target::M, all_units(d.size()));
  const auto se = m_standard_errors(d, fit.beta);
  for (std::size_t j = 0; j < fit.beta.size(); ++j) CHECK(std::abs(fit.beta[j] - m.tau_m[j]) <= 3.0 * se[j]);
}

TEST_CASE("pseudo-likelihood recovers the autologistic coefficients") {
  // A single n = 2000 field leaves the C coefficients with standard errors
  // near 0.3, so the recovery check is made on the average of 20 fields.
  const NetworkModel m = reference_model(random_regular_graph(2000, 3, 11));
  std::vector<double> mean(m.tau_m.size(), 0.0);
  const int fields = 20;
  for (int s = 0; s < fields; ++s) {
    const Dataset d = generate_dataset(m, 1, 500, 300 + s);
    const auto beta = fit_unit_logistic(d, Target::M, all_units(d.size())).beta;
    for (std::size_t j = 0; j < beta.size(); ++j) mean[j] += beta[j] / fields;
  }
  for (std::size_t j = 0; j < mean.size(); ++j) {
    INFO("coefficient " << j << " estimate " << mean[j] << " truth " << m.tau_m[j]);
    CHECK(std::abs(mean[j] - m.tau_m[j]) <= 0.25);
  }
}

TEST_CASE("coding fits spread wider than pseudo-likelihood fits") {
  const NetworkModel m = reference_model(random_regular_graph(400, 3, 13));
  const std::vector<std::size_t> mis = maximal_independent_set(m.adjacency, 50, 1);
  const int batches = 5, per_batch = 16;
  std::size_t wider = 0, total = 0;
  for (int b = 0; b < batches; ++b) {
    std::vector<std::vector<double>> coding(m.tau_m.size()), pseudo(m.tau_m.size());
    for (int r = 0; r < per_batch; ++r) {
      const Dataset d = generate_dataset(m, 1, 500, derive_seed(1000 + b, r));
      const auto bc = fit_unit_logistic(d, Target::M, mis).beta;
      const auto bp = fit_unit_logistic(d, Target::M, all_units(d.size())).beta;
      for (std::size_t j = 0; j < bc.size(); ++j) {
        coding[j].push_back(bc[j]);
        pseudo[j].push_back(bp[j]);
      }
    }
    for (std::size_t j = 0; j < coding.size(); ++j) {
      ++total;
      if (sample_sd(coding[j]) >= sample_sd(pseudo[j])) ++wider;
    }
  }
  CHECK(static_cast<double>(wider) >= 0.8 * static_cast<double>(total));
}

TEST_CASE("Gibbs sampling of the fitted field") {
  const NetworkModel truth = reference_model(random_regular_graph(400, 3, 7));
  const Dataset d = generate_dataset(truth, 1, 500, 21);
  const FittedModels fm = fit_models(d, FitMethod::pseudo, 10, 1);
  const std::vector<int> ones(d.size(), 1);

  SUBCASE("identical seeds give identical samples") {
    CHECK(gibbs_sample_m(fm, d.adjacency, d.c, ones, 20, 30, 2, 5) ==
          gibbs_sample_m(fm, d.adjacency, d.c, ones, 20, 30, 2, 5));
    CHECK(gibbs_sample_m(fm, d.adjacency, d.c, ones, 7, 3, 3, 5).size() == 7);
    CHECK_THROWS_AS(gibbs_sample_m(fm, d.adjacency, d.c, ones, 7, 3, 0, 5), Error);
  }

  SUBCASE("independent chains agree on per-unit means") {
    const std::size_t samples = 1000;
    const auto c1 = gibbs_sample_m(fm, d.adjacency, d.c, ones, samples, 500, 1, 101);
    const auto c2 = gibbs_sample_m(fm, d.adjacency, d.c, ones, samples, 500, 1, 202);
    double diff = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t s = 0; s < samples; ++s) {
        m1 += c1[s][i];
        m2 += c2[s][i];
      }
      diff += std::abs(m1 - m2) / static_cast<double>(samples);
    }
    CHECK(diff / static_cast<double>(d.size()) <= 0.05);
  }
}

TEST_CASE("a decoupled fitted field samples independent Bernoulli draws") {
  const NetworkModel truth = reference_model(random_regular_graph(2000, 3, 8));
  const Dataset d = generate_dataset(truth, 1, 200, 23);
  FittedModels fm = fit_models(d, FitMethod::pseudo, 1, 1);
  fm.m_model.back() = 0.0;  // β_M_nb
  std::vector<int> a(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) a[i] = static_cast<int>(i % 2);

  std::vector<double> prob(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    int sa = 0;
    for (std::size_t j : d.adjacency.neighbors[i]) sa += a[j];
    double eta = fm.m_model[0] + fm.m_model[1] * a[i] + fm.m_model[5] * sa;
    for (std::size_t l = 0; l < 3; ++l) eta += fm.m_model[2 + l] * d.c[i][l];
    prob[i] = expit(eta);
  }

  // Pearson statistic on ten probability bins, pooled over samples.
  const std::size_t samples = 20;
  const auto fields = gibbs_sample_m(fm, d.adjacency, d.c, a, samples, 5, 1, 9);
  std::vector<double> observed(10, 0.0), expected(10, 0.0), variance(10, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(prob[i] * 10.0));
    for (const auto& m : fields) observed[bin] += m[i];
    expected[bin] += samples * prob[i];
    variance[bin] += samples * prob[i] * (1.0 - prob[i]);
  }
  double chi2 = 0.0;
  for (std::size_t b = 0; b < 10; ++b)
    if (variance[b] > 0.0) chi2 += (observed[b] - expected[b]) * (observed[b] - expected[b]) / variance[b];
  CHECK(chi2 <= 29.59);  // 0.999 quantile of chi-square with 10 degrees of freedom
}

TEST_CASE("no effect pathway gives an exactly zero network effect") {
  const NetworkModel truth = reference_model(random_regular_graph(200, 3, 4));
  const Dataset d = generate_dataset(truth, 1, 200, 5);
  FittedModels fm = fit_models(d, FitMethod::pseudo, 1, 1);
  fm.y_model[5] = 0.0;  // α̂_A_nb
  fm.y_model[6] = 0.0;  // α̂_M
  McSettings mc;
  mc.samples = 30;
  mc.burnin = 20;
  CHECK(network_effect_from_models(d, fm, mc, 3).ne == 0.0);
}

TEST_CASE("end-to-end estimation is deterministic and close to the simulated truth") {
  const NetworkModel truth = reference_model(random_regular_graph(1000, 3, 31));
  const GroundTruth gt = ground_truth_ne(truth, 5, 1, 500, 32);
  const Dataset d = generate_dataset(truth, 1, 500, 33);
  McSettings mc;
  for (FitMethod method : {FitMethod::coding, FitMethod::pseudo}) {
    const EffectEstimate e = estimate_network_effect(d, method, mc, 34);
    INFO(to_string(method) << " estimate " << e.ne << " truth " << gt.ne);
    CHECK(e.ne >= -1.0);
    CHECK(e.ne <= 1.0);
    CHECK(std::abs(e.ne - gt.ne) <= 0.15);
    CHECK(estimate_to_json(estimate_network_effect(d, method, mc, 34)) == estimate_to_json(e));
    if (method == FitMethod::coding) {
      CHECK(is_maximal_independent_set(d.adjacency, e.models.mis));
    } else {
      CHECK(e.models.mis.empty());
    }
  }
}

TEST_CASE("fit methods parse from text") {
  CHECK(parse_fit_method("coding") == FitMethod::coding);
  CHECK(parse_fit_method("pseudo") == FitMethod::pseudo);
  CHECK_THROWS_AS(parse_fit_method("ml"), Error);
}
