#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "random_models.hpp"
#include "sgid/cg_model.hpp"

using nlohmann::json;
using sgid::testing::data_path;
using sgid::testing::read_file;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SGID_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sgid_cli_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("identify the worked example") {
  const Run r = run("identify --graph " + data_path("fig1c.json") + " --outcome Y2 --do A1=1,A2=1 --simplify");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["meta"]["tool"] == "sgid");
  CHECK(doc["meta"]["args"].is_array());
  CHECK(doc["outcome"] == json::array({"Y2"}));
  CHECK(doc["districts"].size() == 3);
  CHECK(doc["blocks"].size() == 1);
  CHECK(doc["simplified"] == true);

  const Run text = run("identify --graph " + data_path("fig1c.json") + " --outcome Y2 --do A1=1,A2=1 --simplify "
                       "--format text");
  REQUIRE(text.code == 0);
  CHECK(text.out.rfind("# tool: sgid", 0) == 0);
  CHECK(text.out.find("Σ_{A2} p(A2 | C2) p(Y2 | a1,C2,A2,M2)") != std::string::npos);
}

TEST_CASE("the bow is not identified") {
  const Run r = run("identify --graph " + data_path("bow.json") + " --outcome Y --do A=1");
  CHECK(r.code == 2);
  const json doc = json::parse(r.out);
  CHECK(doc["identified"] == false);
  CHECK(doc["witness"] == json::array({"A", "Y"}));
  CHECK(doc.contains("meta"));
}

TEST_CASE("evaluate pipeline agrees with the truncated factorization") {
  sgid::testing::Rng rng(77);
  const sgid::MixedGraph fig1a = sgid::testing::load_fixture("fig1a.json");
  const sgid::CgModel model = sgid::testing::random_cg_model(rng, fig1a);
  const sgid::TabularDist observed = sgid::joint_from_cg(model).marginalize({"U1", "U2"});
  const std::string dist = scratch("p.json"), functional = scratch("f.json"), result = scratch("r.json");
  write(dist, sgid::dist_to_json(observed));

  REQUIRE(run("identify --graph " + data_path("fig1c.json") + " --outcome Y2 --do A1=1,A2=0 --out " + functional)
              .code == 0);
  REQUIRE(run("evaluate --functional " + functional + " --dist " + dist + " --out " + result).code == 0);
  const json doc = json::parse(read_file(result));
  const sgid::TabularDist oracle = sgid::cg_truncated_oracle(model, {{"A1", 1}, {"A2", 0}}, {"Y2"});
  REQUIRE(doc["probabilities"].size() == 2);
  for (const auto& entry : doc["probabilities"]) {
    const int y = entry["assignment"]["Y2"].get<int>();
    CHECK(std::abs(entry["p"].get<double>() - oracle.factor().at({{"Y2", y}})) <= 1e-8);
  }
}

TEST_CASE("classify and project") {
  const Run c = run("classify --graph " + data_path("fig1a.json"));
  REQUIRE(c.code == 0);
  const json doc = json::parse(c.out);
  CHECK(doc.contains("meta"));
  CHECK(doc.contains("districts"));

  const Run p = run("project --graph " + data_path("fig1a.json") + " --hidden U1,U2");
  REQUIRE(p.code == 0);
  const sgid::MixedGraph projected = sgid::parse_graph(p.out);
  CHECK(sgid::same_structure(projected, sgid::testing::load_fixture("fig1c.json")));
}

TEST_CASE("stochastic subcommands require a seed and are deterministic") {
  CHECK(run("simulate --n 40 --replicates 1").code == 64);
  CHECK(run("generate --n 40 --data-out x --network-out y").code == 64);

  const std::string data = scratch("d.csv"), network = scratch("n.json");
  REQUIRE(run("generate --n 60 --burnin 50 --seed 5 --data-out " + data + " --network-out " + network).code == 0);
  const std::string args = "estimate --data " + data + " --network " + network +
                           " --method pseudo --mc-samples 20 --burnin 20 --seed 7";
  const Run a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const json est = json::parse(a.out);
  CHECK(est["meta"]["seed"] == 7);
  CHECK(std::abs(est["ne"].get<double>()) <= 1.0);

  const Run sim = run("simulate --n 40 --replicates 2 --burnin 20 --truth-reps 1 --mc-samples 10 --mc-burnin 10 "
                      "--mis-restarts 2 --seed 3");
  REQUIRE(sim.code == 0);
  CHECK(sim.out.find("# seed: 3") != std::string::npos);
  CHECK(sim.out.find("n,replicate,estimator,estimate,ground_truth,bias") != std::string::npos);
}

TEST_CASE("errors and usage") {
  CHECK(run("identify --graph " + data_path("fig1c.json") + " --outcome Nope --do A1=1").code == 1);
  CHECK(run("frobnicate").code == 64);
  CHECK(run("identify --outcome Y").code == 64);
  CHECK(run("--version").code == 0);
  CHECK(run("--help").code == 0);
}
