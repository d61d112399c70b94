#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgid/autog.hpp"
#include "sgid/netsim.hpp"

namespace sgid {

struct ExperimentConfig {
  std::vector<std::size_t> ns{400};
  std::size_t replicates = 100;
  std::vector<FitMethod> estimators{FitMethod::coding, FitMethod::pseudo};
  std::size_t degree = 3;
  std::size_t gibbs_iters = 1;
  std::size_t burnin = 500;
  std::size_t truth_reps = 5;
  McSettings mc;
  std::uint64_t seed = 0;
};

struct ExperimentRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  FitMethod estimator = FitMethod::pseudo;
  double estimate = 0.0;
  double ground_truth = 0.0;
  double bias = 0.0;
};

struct BiasSummary {
  std::size_t n = 0;
  FitMethod estimator = FitMethod::pseudo;
  std::size_t count = 0;
  double mean_bias = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;   ///< 2.5% empirical quantile of replicate biases
  double ci_high = 0.0;  ///< 97.5% empirical quantile
  double mean_ci_low = 0.0;   ///< mean bias − 1.96 · sd / √count
  double mean_ci_high = 0.0;  ///< mean bias + 1.96 · sd / √count
  double mean_abs_bias = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;  ///< ordered by n, replicate, estimator
  std::vector<BiasSummary> summary;
  std::vector<GroundTruth> truths;  ///< one per n
};

/// One network per n; ground truth once per network; replicates run in
/// parallel with streams derived from (seed, n, replicate).
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<BiasSummary> summarize(const std::vector<ExperimentRow>& rows);

/// CSV columns n, replicate, estimator, estimate, ground_truth, bias.
std::string rows_to_csv(const std::vector<ExperimentRow>& rows);
std::string summary_to_csv(const std::vector<BiasSummary>& summary);

}  // namespace sgid
