#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgid/netsim.hpp"

namespace sgid {

/// Largest of `restarts` randomized greedy maximal independent sets. Each run
/// repeatedly takes a vertex of minimum residual degree, breaking ties by a
/// fresh random permutation.
std::vector<std::size_t> maximal_independent_set(const Adjacency& adj, std::size_t restarts, std::uint64_t seed);
bool is_independent_set(const Adjacency& adj, const std::vector<std::size_t>& s);
bool is_maximal_independent_set(const Adjacency& adj, const std::vector<std::size_t>& s);

struct LogisticFit {
  std::vector<double> beta;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;  ///< ∞-norm at the returned coefficients
  bool separated = false;      ///< coefficients hit the |β| ≤ 15 cap
  std::vector<double> loglik_trace;
};

/// Damped Newton maximization of the logistic log-likelihood; stops at
/// gradient ∞-norm ≤ 1e-8 or after 100 iterations.
LogisticFit fit_logistic(const std::vector<std::vector<double>>& rows, const std::vector<int>& y);

enum class Target { A, M, Y };
enum class FitMethod { coding, pseudo };

const char* to_string(FitMethod m);
FitMethod parse_fit_method(std::string_view text);

/// Unit-level design rows. A: (1, C); M: (1, A_i, C, Σ A_j, Σ M_j);
/// Y: (1, C, A_i, Σ A_j, M_i), sums over the unit's neighbors.
std::vector<double> unit_features(const Dataset& d, Target target, std::size_t i);
LogisticFit fit_unit_logistic(const Dataset& d, Target target, const std::vector<std::size_t>& subset);

struct FittedModels {
  std::vector<double> a_model;
  std::vector<double> m_model;
  std::vector<double> y_model;
  FitMethod method = FitMethod::pseudo;
  std::vector<std::size_t> mis;  ///< coding subset; empty for pseudo-likelihood
  bool separated = false;
};

struct McSettings {
  std::size_t samples = 200;
  std::size_t burnin = 500;
  std::size_t chains = 1;
  std::size_t mis_restarts = 50;
};

FittedModels fit_models(const Dataset& d, FitMethod method, std::size_t mis_restarts, std::uint64_t seed);

/// Post-burnin M fields, one per sweep, from the fitted autologistic
/// conditionals with treatments held at `a`. Samples are split evenly across
/// chains, each with its own burnin and random stream.
std::vector<std::vector<int>> gibbs_sample_m(const FittedModels& models, const Adjacency& adj,
                                             const std::vector<std::vector<double>>& c, const std::vector<int>& a,
                                             std::size_t samples, std::size_t burnin, std::size_t chains,
                                             std::uint64_t seed);

struct EffectEstimate {
  double ne = 0.0;
  double mean_y1 = 0.0;
  double mean_y0 = 0.0;
  FitMethod method = FitMethod::pseudo;
  McSettings mc;
  std::uint64_t seed = 0;
  FittedModels models;
};

/// (1/N) Σ_i Ê[Y_i(1)] − Ê[Y_i(0)], each term averaging over M fields drawn
/// under A ≡ a the mixture Σ_{a'} p̂(Y_i = 1 | a', deg_i·a, M_i, C_i) p̂(a' | C_i).
EffectEstimate estimate_network_effect(const Dataset& d, FitMethod method, const McSettings& mc, std::uint64_t seed);
/// Same functional with already fitted models.
EffectEstimate network_effect_from_models(const Dataset& d, const FittedModels& models, const McSettings& mc,
                                          std::uint64_t seed);

std::string estimate_to_json(const EffectEstimate& e, int indent = 2);

}  // namespace sgid
