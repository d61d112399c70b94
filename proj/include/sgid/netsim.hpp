#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sgid {

/// Undirected network over units 0..n-1 with sorted neighbor lists.
struct Adjacency {
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t size() const noexcept { return neighbors.size(); }
  std::size_t edge_count() const;
  friend bool operator==(const Adjacency&, const Adjacency&) = default;
};

Adjacency adjacency_from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
bool is_connected(const Adjacency& adj);
/// Symmetric, no self-loops, no repeated neighbors.
bool is_simple(const Adjacency& adj);

std::string adjacency_to_json(const Adjacency& adj, int indent = -1);
Adjacency parse_adjacency(std::string_view json_text);

/// splitmix64 finalizer applied to (master, stream); independent streams for
/// replicates, arms and chains.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

using Rng = std::mt19937_64;

double expit(double x);
bool bernoulli(Rng& rng, double p);
double beta_draw(Rng& rng, double a, double b);

/// Simple connected d-regular graph from the pairing model, retrying until the
/// pairing is simple and the result connected.
Adjacency random_regular_graph(std::size_t n, std::size_t degree, std::uint64_t seed);

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

struct NetworkModel {
  Adjacency adjacency;
  std::vector<BetaParams> c_params;  ///< p covariates
  std::vector<BetaParams> u_params;  ///< q hidden covariates
  std::vector<double> tau_a;         ///< γ0, γ_C, γ_U
  std::vector<double> tau_m;         ///< β0, β_A, β_C, β_A_nb, β_M_nb
  std::vector<double> tau_y;         ///< α0, α_C, α_U, α_A_nb, α_M

  std::size_t p() const noexcept { return c_params.size(); }
  std::size_t q() const noexcept { return u_params.size(); }
  void validate() const;
};

/// The reference simulation's covariate laws and coefficient vectors.
NetworkModel reference_model(Adjacency adjacency);

struct Dataset {
  Adjacency adjacency;
  std::vector<std::vector<double>> c;  ///< per unit, length p
  std::vector<std::vector<double>> u;  ///< per unit, length q; empty unless retained
  std::vector<int> a, m, y;

  std::size_t size() const noexcept { return a.size(); }
};

/// One systematic-scan sweep of the autologistic M field,
/// p(M_i = 1 | ·) = expit(β0 + β_A a_i + β_C·C_i + β_A_nb Σ_{N_i} a_j + β_M_nb Σ_{N_i} M_j).
void gibbs_sweep(const Adjacency& adj, const std::vector<double>& beta, const std::vector<std::vector<double>>& c,
                 const std::vector<int>& a, std::vector<int>& m, Rng& rng);

/// Draws C, U, A; runs burnin + gibbs_iters sweeps from M ~ Bernoulli(1/2);
/// draws Y from the final field.
Dataset generate_dataset(const NetworkModel& model, std::size_t gibbs_iters, std::size_t burnin,
                         std::uint64_t seed, bool keep_hidden = false);

struct GroundTruth {
  double ne = 0.0;
  double se = 0.0;  ///< standard error over replications
  std::size_t reps = 0;
};

/// Mean over reps and units of Y(1) − Y(0) under the all-treated and
/// all-untreated interventions, sharing C and U between the two arms.
GroundTruth ground_truth_ne(const NetworkModel& model, std::size_t reps, std::size_t gibbs_iters, std::size_t burnin,
                            std::uint64_t seed);

std::string dataset_to_csv(const Dataset& d);
/// Reads unit, C1..Cp, A, M, Y columns; '#' lines are comments.
Dataset parse_dataset_csv(std::string_view text, const Adjacency& adjacency);

}  // namespace sgid
