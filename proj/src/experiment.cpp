#include "sgid/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace sgid {

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  if (config.replicates == 0) return result;
  const std::size_t k = config.estimators.size();
  for (std::size_t n : config.ns) {
    const std::uint64_t n_seed = derive_seed(config.seed, n);
    const NetworkModel model = reference_model(random_regular_graph(n, config.degree, derive_seed(n_seed, 0)));
    const GroundTruth truth =
        ground_truth_ne(model, config.truth_reps, config.gibbs_iters, config.burnin, derive_seed(n_seed, 1));
    result.truths.push_back(truth);

    std::vector<ExperimentRow> rows(config.replicates * k);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t r = 0; r < config.replicates; ++r) {
      const std::uint64_t rep_seed = derive_seed(derive_seed(n_seed, 2), r);
      const Dataset data = generate_dataset(model, config.gibbs_iters, config.burnin, derive_seed(rep_seed, 0));
      for (std::size_t e = 0; e < k; ++e) {
        const auto est = estimate_network_effect(data, config.estimators[e], config.mc, derive_seed(rep_seed, 1 + e));
        rows[r * k + e] = ExperimentRow{n, r, config.estimators[e], est.ne, truth.ne, est.ne - truth.ne};
      }
    }
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  result.summary = summarize(result.rows);
  return result;
}

std::vector<BiasSummary> summarize(const std::vector<ExperimentRow>& rows) {
  std::map<std::pair<std::size_t, int>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.n, static_cast<int>(r.estimator)}].push_back(r.bias);
  std::vector<BiasSummary> out;
  for (const auto& [key, biases] : groups) {
    BiasSummary s;
    s.n = key.first;
    s.estimator = static_cast<FitMethod>(key.second);
    s.count = biases.size();
    double sum = 0.0, abs_sum = 0.0;
    for (double b : biases) {
      sum += b;
      abs_sum += std::abs(b);
    }
    s.mean_bias = sum / static_cast<double>(s.count);
    s.mean_abs_bias = abs_sum / static_cast<double>(s.count);
    if (s.count > 1) {
      double ss = 0.0;
      for (double b : biases) ss += (b - s.mean_bias) * (b - s.mean_bias);
      s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    s.ci_low = quantile(biases, 0.025);
    s.ci_high = quantile(biases, 0.975);
    const double half = 1.96 * s.sd / std::sqrt(static_cast<double>(s.count));
    s.mean_ci_low = s.mean_bias - half;
    s.mean_ci_high = s.mean_bias + half;
    out.push_back(s);
  }
  return out;
}

std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "n,replicate,estimator,estimate,ground_truth,bias\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.replicate << ',' << to_string(r.estimator) << ',' << r.estimate << ','
        << r.ground_truth << ',' << r.bias << '\n';
  return out.str();
}

std::string summary_to_csv(const std::vector<BiasSummary>& summary) {
  std::ostringstream out;
  out.precision(6);
  out << "n,estimator,count,mean_bias,sd,ci_low,ci_high,mean_ci_low,mean_ci_high,mean_abs_bias\n";
  for (const auto& s : summary)
    out << s.n << ',' << to_string(s.estimator) << ',' << s.count << ',' << s.mean_bias << ',' << s.sd << ','
        << s.ci_low << ',' << s.ci_high << ',' << s.mean_ci_low << ',' << s.mean_ci_high << ','
        << s.mean_abs_bias << '\n';
  return out.str();
}

}  // namespace sgid
