#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgid/autog.hpp"
#include "sgid/experiment.hpp"
#include "sgid/graph.hpp"
#include "sgid/identify.hpp"
#include "sgid/netsim.hpp"
#include "sgid/projection.hpp"
#include "sgid/tabular.hpp"

#ifndef SGID_VERSION
#define SGID_VERSION "dev"
#endif

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotIdentified = 2;
constexpr int kExitUsage = 64;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sgid::Error(sgid::ErrorCode::invalid_argument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sgid::Error(sgid::ErrorCode::invalid_argument, "cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

sgid::Assignment parse_do(const std::string& text) {
  sgid::Assignment a;
  for (const auto& item : split(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw sgid::Error(sgid::ErrorCode::invalid_argument, "expected NAME=VALUE in --do, got '" + item + "'");
    std::size_t used = 0;
    const int value = std::stoi(item.substr(eq + 1), &used);
    if (used != item.size() - eq - 1 || value < 0)
      throw sgid::Error(sgid::ErrorCode::invalid_argument, "bad value in --do: '" + item + "'");
    if (!a.emplace(item.substr(0, eq), value).second)
      throw sgid::Error(sgid::ErrorCode::invalid_argument, "variable repeated in --do: " + item.substr(0, eq));
  }
  return a;
}

// Graph files are JSON unless the first non-blank character says otherwise.
sgid::MixedGraph load_graph(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return sgid::parse_graph(text);
  return sgid::parse_graph_text(text);
}

// Provenance stamped onto every output: tool version, argv and seed.
struct Meta {
  std::vector<std::string> args;
  std::optional<std::uint64_t> seed;

  json to_json() const {
    json m{{"tool", "sgid"}, {"version", SGID_VERSION}, {"args", args}};
    m["seed"] = seed ? json(*seed) : json(nullptr);
    return m;
  }

  std::string comment_header() const {
    std::string out = "# tool: sgid " SGID_VERSION "\n# args:";
    for (const auto& a : args) out += " " + a;
    out += "\n# seed: " + (seed ? std::to_string(*seed) : std::string("none")) + "\n";
    return out;
  }
};

std::string with_meta(const std::string& body_json, const Meta& meta) {
  json doc = json::parse(body_json);
  json out{{"meta", meta.to_json()}};
  for (auto it = doc.begin(); it != doc.end(); ++it) out[it.key()] = it.value();
  return out.dump(2);
}

json class_json(const sgid::MixedGraph& g) {
  const auto c = sgid::classify(g);
  return json{{"is_dag", c.is_dag}, {"is_ug", c.is_ug}, {"is_cg", c.is_cg}, {"is_admg", c.is_admg}, {"is_sg", c.is_sg}};
}

struct IdentifyArgs {
  std::string graph, outcome, treatment, out, format = "json";
  bool simplify = false, trace = false;
};

int cmd_classify(const std::string& graph_path, const std::string& out, const Meta& meta) {
  const auto g = load_graph(graph_path);
  json doc{{"meta", meta.to_json()}, {"class", class_json(g)}};
  doc["districts"] = sgid::components(g, sgid::ComponentKind::district);
  doc["blocks"] = sgid::components(g, sgid::ComponentKind::block);
  doc["nontrivial_blocks"] = sgid::components(g, sgid::ComponentKind::nontrivial_block);
  write_output(out, doc.dump(2));
  return kExitOk;
}

int cmd_project(const std::string& graph_path, const std::string& hidden, const std::string& kind,
                const std::string& out, const Meta& meta) {
  const auto g = load_graph(graph_path);
  const auto h = split(hidden);
  const auto c = sgid::classify(g);
  const bool latent = kind == "latent" || (kind == "auto" && c.is_dag);
  const auto p = latent ? sgid::latent_projection(g, h) : sgid::segregated_projection(g, h);
  json doc = json::parse(sgid::graph_to_json(p));
  json outdoc{{"meta", meta.to_json()}};
  for (auto it = doc.begin(); it != doc.end(); ++it) outdoc[it.key()] = it.value();
  outdoc["projection"] = latent ? "latent" : "segregated";
  outdoc["class"] = class_json(p);
  write_output(out, outdoc.dump(2));
  return kExitOk;
}

std::string trace_text(const sgid::Functional& f) {
  std::string out;
  for (const auto& d : f.districts) {
    out += "district {";
    for (std::size_t i = 0; i < d.district.size(); ++i) out += (i ? "," : "") + d.district[i];
    out += "}: " + d.program.base;
    for (const auto& v : d.program.sequence) out += " -> fix " + v;
    out += "\n";
  }
  return out;
}

int cmd_identify(const IdentifyArgs& a, const Meta& meta) {
  const auto g = load_graph(a.graph);
  const auto result = sgid::identify(g, split(a.outcome), parse_do(a.treatment));
  if (!result.identified()) {
    const std::string witness = with_meta(sgid::failure_to_json(*result.failure), meta);
    std::cout << witness << '\n';
    if (!a.out.empty() && a.out != "-") write_output(a.out, witness);
    return kExitNotIdentified;
  }
  sgid::Functional f = *result.functional;
  if (a.simplify) f = sgid::simplify(f);
  if (a.trace) std::cerr << trace_text(f);
  if (a.format == "text") {
    write_output(a.out, meta.comment_header() + sgid::render_functional(f) + "\n");
  } else {
    write_output(a.out, with_meta(sgid::functional_to_json(f), meta));
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& functional, const std::string& dist, bool allow_zeros, const std::string& out,
                 const Meta& meta) {
  const auto f = sgid::parse_functional(read_file(functional));
  const auto p = sgid::parse_dist(read_file(dist));
  sgid::EvalOptions opts;
  opts.policy = allow_zeros ? sgid::ZeroPolicy::allow_zeros : sgid::ZeroPolicy::strict;
  const auto r = sgid::evaluate_functional(f, p, opts);
  json doc{{"meta", meta.to_json()}, {"outcome", f.outcome}, {"treatment", f.restrict}};
  doc["probabilities"] = json::array();
  const auto& fac = r.factor();
  for (std::size_t cell = 0; cell < fac.size(); ++cell)
    doc["probabilities"].push_back(json{{"assignment", fac.assignment(cell)}, {"p", fac.table()[cell]}});
  doc["distribution"] = json::parse(sgid::dist_to_json(r));
  write_output(out, doc.dump(2));
  return kExitOk;
}

struct SimulateArgs {
  std::string ns = "400", estimators = "coding,pseudo", out, summary_out;
  std::size_t replicates = 100, degree = 3, gibbs_iters = 1, burnin = 500, truth_reps = 5;
  std::size_t mc_samples = 200, mc_burnin = 500, chains = 1, mis_restarts = 50;
  std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a, const Meta& meta) {
  sgid::ExperimentConfig cfg;
  cfg.ns.clear();
  for (const auto& s : split(a.ns)) cfg.ns.push_back(std::stoul(s));
  cfg.estimators.clear();
  for (const auto& s : split(a.estimators)) cfg.estimators.push_back(sgid::parse_fit_method(s));
  cfg.replicates = a.replicates;
  cfg.degree = a.degree;
  cfg.gibbs_iters = a.gibbs_iters;
  cfg.burnin = a.burnin;
  cfg.truth_reps = a.truth_reps;
  cfg.mc = {a.mc_samples, a.mc_burnin, a.chains, a.mis_restarts};
  cfg.seed = a.seed;
  const auto result = sgid::run_experiment(cfg);
  std::string header = meta.comment_header();
  for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
    std::ostringstream line;
    line << "# ground_truth n=" << cfg.ns[i] << " ne=" << result.truths[i].ne << " se=" << result.truths[i].se
         << " reps=" << result.truths[i].reps << "\n";
    header += line.str();
  }
  write_output(a.out, header + sgid::rows_to_csv(result.rows));
  const std::string summary = meta.comment_header() + sgid::summary_to_csv(result.summary);
  if (!a.summary_out.empty()) {
    write_output(a.summary_out, summary);
  } else if (!a.out.empty() && a.out != "-") {
    std::cerr << summary;
  }
  return kExitOk;
}

int cmd_estimate(const std::string& data, const std::string& network, const std::string& method,
                 const sgid::McSettings& mc, std::uint64_t seed, const std::string& out, const Meta& meta) {
  const auto adj = sgid::parse_adjacency(read_file(network));
  const auto d = sgid::parse_dataset_csv(read_file(data), adj);
  const auto e = sgid::estimate_network_effect(d, sgid::parse_fit_method(method), mc, seed);
  write_output(out, with_meta(sgid::estimate_to_json(e), meta));
  return kExitOk;
}

int cmd_generate(std::size_t n, std::size_t degree, std::size_t gibbs_iters, std::size_t burnin, std::uint64_t seed,
                 const std::string& data_out, const std::string& network_out, const Meta& meta) {
  const auto adj = sgid::random_regular_graph(n, degree, sgid::derive_seed(seed, 0));
  const auto model = sgid::reference_model(adj);
  const auto d = sgid::generate_dataset(model, gibbs_iters, burnin, sgid::derive_seed(seed, 1));
  write_output(network_out, with_meta(sgid::adjacency_to_json(adj), meta));
  write_output(data_out, meta.comment_header() + sgid::dataset_to_csv(d));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identification in segregated graphs and network effect estimation"};
  app.set_version_flag("--version", SGID_VERSION);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  std::string graph_path, out;
  auto* classify = app.add_subcommand("classify", "Report graph class, districts and blocks");
  classify->add_option("--graph", graph_path, "Graph JSON or text file")->required()->check(CLI::ExistingFile);
  classify->add_option("--out", out, "Output path (default stdout)");

  std::string hidden, kind = "auto";
  auto* project = app.add_subcommand("project", "Latent or segregated projection onto observed vertices");
  project->add_option("--graph", graph_path)->required()->check(CLI::ExistingFile);
  project->add_option("--hidden", hidden, "Comma-separated hidden vertices")->required();
  project->add_option("--kind", kind)->check(CLI::IsMember({"auto", "latent", "segregated"}));
  project->add_option("--out", out);

  IdentifyArgs ida;
  auto* identify = app.add_subcommand("identify", "Identify p(Y | do(A = a)) in a segregated graph");
  identify->add_option("--graph", ida.graph)->required()->check(CLI::ExistingFile);
  identify->add_option("--outcome", ida.outcome, "Comma-separated outcome vertices")->required();
  identify->add_option("--do", ida.treatment, "Intervention, e.g. A1=1,A2=1")->required();
  identify->add_flag("--simplify", ida.simplify, "Prune and rewrite district terms");
  identify->add_flag("--trace", ida.trace, "Print fixing programs to stderr");
  identify->add_option("--format", ida.format)->check(CLI::IsMember({"json", "text"}));
  identify->add_option("--out", ida.out);

  std::string functional_path, dist_path;
  bool allow_zeros = false;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a functional on a tabular distribution");
  evaluate->add_option("--functional", functional_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--dist", dist_path)->required()->check(CLI::ExistingFile);
  evaluate->add_flag("--allow-zeros", allow_zeros, "Treat 0/0 as 0 in kernel divisions");
  evaluate->add_option("--out", out);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Bias experiment over replicated datasets");
  simulate->add_option("--n", sa.ns, "Comma-separated network sizes");
  simulate->add_option("--replicates", sa.replicates);
  simulate->add_option("--estimators", sa.estimators, "Comma-separated subset of coding,pseudo");
  simulate->add_option("--degree", sa.degree);
  simulate->add_option("--gibbs-iters", sa.gibbs_iters);
  simulate->add_option("--burnin", sa.burnin);
  simulate->add_option("--truth-reps", sa.truth_reps);
  simulate->add_option("--mc-samples", sa.mc_samples);
  simulate->add_option("--mc-burnin", sa.mc_burnin);
  simulate->add_option("--chains", sa.chains)->check(CLI::PositiveNumber);
  simulate->add_option("--mis-restarts", sa.mis_restarts)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sa.seed)->required();
  simulate->add_option("--out", sa.out, "Per-replicate CSV");
  simulate->add_option("--summary-out", sa.summary_out, "Aggregated bias CSV");

  std::string data_path, network_path, method = "pseudo";
  sgid::McSettings mc;
  std::uint64_t seed = 0;
  auto* estimate = app.add_subcommand("estimate", "Network average effect by auto-g-computation");
  estimate->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  estimate->add_option("--network", network_path)->required()->check(CLI::ExistingFile);
  estimate->add_option("--method", method)->check(CLI::IsMember({"coding", "pseudo"}));
  estimate->add_option("--mc-samples", mc.samples);
  estimate->add_option("--burnin", mc.burnin);
  estimate->add_option("--chains", mc.chains)->check(CLI::PositiveNumber);
  estimate->add_option("--mis-restarts", mc.mis_restarts)->check(CLI::PositiveNumber);
  estimate->add_option("--seed", seed)->required();
  estimate->add_option("--out", out);

  std::size_t n = 400, degree = 3, gibbs_iters = 1, burnin = 500;
  std::string data_out, network_out;
  auto* generate = app.add_subcommand("generate", "Draw a network and dataset from the reference model");
  generate->add_option("--n", n);
  generate->add_option("--degree", degree);
  generate->add_option("--gibbs-iters", gibbs_iters);
  generate->add_option("--burnin", burnin);
  generate->add_option("--seed", seed)->required();
  generate->add_option("--data-out", data_out)->required();
  generate->add_option("--network-out", network_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (threads > 0) omp_set_num_threads(threads);
  Meta meta;
  for (int i = 0; i < argc; ++i) meta.args.emplace_back(argv[i]);

  try {
    if (*classify) return cmd_classify(graph_path, out, meta);
    if (*project) return cmd_project(graph_path, hidden, kind, out, meta);
    if (*identify) return cmd_identify(ida, meta);
    if (*evaluate) return cmd_evaluate(functional_path, dist_path, allow_zeros, out, meta);
    if (*simulate) {
      meta.seed = sa.seed;
      return cmd_simulate(sa, meta);
    }
    if (*estimate) {
      meta.seed = seed;
      return cmd_estimate(data_path, network_path, method, mc, seed, out, meta);
    }
    if (*generate) {
      meta.seed = seed;
      return cmd_generate(n, degree, gibbs_iters, burnin, seed, data_out, network_out, meta);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
