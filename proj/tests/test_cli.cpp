#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cascade/cli.hpp"

namespace cli = cascade::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Data rows of a CSV rendering (header comments dropped).
std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cascade_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in("# schema=x\n\n  A = 0.3 \nno equals here\n#eta=0.1\n");
  const cli::KeyValues kv = cli::parse_config(in);
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"schema", "x"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"A", "0.3"});
  CHECK(kv[2] == std::pair<std::string, std::string>{"eta", "0.1"});
}

TEST_CASE("table rendering") {
  cli::Table t;
  t.provenance = {{"a", "1"}, {"axis", "x"}, {"axis", "y"}};
  t.columns = {"x", "tag"};
  t.rows = {{1.0 / 3.0, std::string("ok")}};
  std::ostringstream csv, json;
  t.render_csv(csv);
  t.render_json(json);
  CHECK(csv.str() == "# a=1\n# axis=x\n# axis=y\nx,tag\n0.333333333333,ok\n");
  const auto doc = nlohmann::json::parse(json.str());
  CHECK(doc["provenance"]["a"] == "1");
  CHECK(doc["provenance"]["axis"].size() == 2);
  CHECK(json.str().find("\"x\": 0.333333333333") != std::string::npos);
  CHECK(doc["rows"][0]["tag"] == "ok");
}

TEST_CASE("photon number and variance") {
  const Outcome o = run({"photon", "--A", "0.3", "--kappa", "0.2", "--omega", "0", "--eta", "0"});
  CHECK(o.code == cli::kOk);
  CHECK(data_lines(o.out) == std::vector<std::string>{"mean_photon", "0.75"});
  CHECK(o.out.find("# schema=cascade-output/1\n") == 0);
  CHECK(o.out.find("# command=photon\n") != std::string::npos);

  const Outcome v = run({"variance", "--A", "1000", "--omega", "0.012"});
  REQUIRE(v.code == cli::kOk);
  CHECK(data_lines(v.out)[1].find(",0.0171909309579,") != std::string::npos);

  const Outcome t = run({"variance", "--A", "0.33", "--omega", "1", "--eta", "0.5", "--at-time", "0"});
  CHECK(data_lines(t.out)[1] == "0,0,0,1,1,0,true");
}

TEST_CASE("csv and json carry the same numbers") {
  const Outcome csv = run({"variance", "--A", "0.33", "--omega", "1", "--eta", "0.5"});
  const Outcome json = run({"variance", "--A", "0.33", "--omega", "1", "--eta", "0.5", "--format", "json"});
  REQUIRE(csv.code == 0);
  REQUIRE(json.code == 0);
  const auto lines = data_lines(csv.out);
  const auto doc = nlohmann::json::parse(json.out);
  std::istringstream header(lines[0]), values(lines[1]);
  std::string col, val;
  while (std::getline(header, col, ',') && std::getline(values, val, ',')) {
    const std::size_t at = json.out.find("\"" + col + "\": " + val);
    REQUIRE(at != std::string::npos);
    const char next = json.out[at + col.size() + 4 + val.size()];
    CHECK((next == ',' || next == '\n'));
    CHECK(doc["rows"][0][col].get<double>() == std::stod(val));
  }
  CHECK(doc["provenance"]["format"] == "json");
}

TEST_CASE("exit codes") {
  CHECK(run({"variance", "--A", "0.99", "--omega", "10.1", "--eta", "1"}).code == cli::kAboveThreshold);
  CHECK(run({"variance", "--eta", "2"}).code == cli::kInvalidInput);
  CHECK(run({"variance", "--A", "x"}).code == cli::kInvalidInput);
  CHECK(run({"variance", "--theta", "0.3"}).code == cli::kInvalidInput);
  CHECK(run({"variance", "--format", "xml"}).code == cli::kInvalidInput);
  CHECK(run({"frobnicate"}).code == cli::kInvalidInput);
  CHECK(run({}).code == cli::kInvalidInput);
  CHECK(run({"sweep", "--axis", "omega:1:0"}).code == cli::kInvalidInput);
  CHECK(run({"simulate", "--A", "0.33", "--omega", "1", "--step", "100"}).code == cli::kInvalidInput);
  CHECK(run({"oracle", "--A", "0.99", "--omega", "10.1", "--eta", "1"}).code == cli::kAboveThreshold);

  const Outcome small = run({"oracle", "--A", "0.3", "--n-max", "4"});
  CHECK(small.code == cli::kUnconverged);
  CHECK(small.out.find("converged,false") != std::string::npos);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("coefficients") {
  const Outcome o = run({"coefficients", "--A", "0.99", "--omega", "10.5", "--eta", "1"});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("gain_threshold,0.995813338556\n") != std::string::npos);
  CHECK(o.out.find("below_threshold,true\n") != std::string::npos);
}

TEST_CASE("sweep output") {
  const Outcome o = run({"sweep", "--A", "0.99", "--eta", "1", "--axis", "omega:9:11:3", "--axis",
                         "kappa:0.2:0.4:2"});
  REQUIRE(o.code == 0);
  const auto lines = data_lines(o.out);
  CHECK(lines[0] == "omega,kappa,var_minus");
  CHECK(lines[1] == "9,0.2,ABOVE_THRESHOLD");
  CHECK(lines.size() == 7);
  CHECK(o.out.find("# axis=omega:9:11:3\n# axis=kappa:0.2:0.4:2\n") != std::string::npos);

  const Outcome j = run({"sweep", "--A", "0.99", "--eta", "1", "--axis", "omega:9:11:3", "--format", "json"});
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["rows"][0]["var_minus"] == "ABOVE_THRESHOLD");
  CHECK(doc["rows"][2]["var_minus"].is_number());
}

TEST_CASE("optimize") {
  const Outcome o = run({"optimize", "--A", "1000", "--search", "omega:0:0.1"});
  REQUIRE(o.code == 0);
  const auto lines = data_lines(o.out);
  CHECK(lines[0] == "A,kappa,omega,eta,theta,value,grid_value,evaluations");
  CHECK(run({"optimize", "--A", "1000", "--search", "omega:0"}).code == cli::kInvalidInput);
  CHECK(run({"optimize", "--A", "0.99", "--eta", "1", "--search", "omega:9:10"}).code == cli::kInvalidInput);
}

TEST_CASE("simulate") {
  const fs::path dir = scratch_dir("simulate");
  const std::string series = (dir / "series.csv").string();
  const Outcome o = run({"simulate", "--A", "0.33", "--eta", "0.3", "--n-traj", "2000", "--seed", "9",
                         "--stride", "1000", "--series", series});
  REQUIRE(o.code == 0);
  const auto lines = data_lines(o.out);
  CHECK(lines[0] == "quantity,analytic,ode,ensemble,std_error,z_score");
  CHECK(lines[1].rfind("alpha_sq_plus,1.82", 0) == 0);
  CHECK(o.out.find("# resolved_t_final=") != std::string::npos);
  const std::string ts = slurp(series);
  CHECK(ts.rfind("t,re_mean_alpha,im_mean_alpha,re_alpha_sq,im_alpha_sq,occupancy\n0,0,0,0,0,0\n", 0) == 0);
  // Same seed, same output.
  const Outcome again = run({"simulate", "--A", "0.33", "--eta", "0.3", "--n-traj", "2000", "--seed", "9",
                             "--stride", "1000", "--series", series});
  CHECK(data_lines(again.out) == lines);
}

TEST_CASE("oracle") {
  const fs::path dir = scratch_dir("oracle");
  const std::string pops = (dir / "pops.csv").string();
  const Outcome o = run({"oracle", "--A", "0.5", "--omega", "1", "--eta", "0.3", "--populations", pops});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("converged,true,NA,NA") != std::string::npos);
  CHECK(slurp(pops).find("n,population\n0,") != std::string::npos);

  const Outcome phased = run({"oracle", "--A", "0.33", "--omega", "1", "--eta", "0.5", "--theta", "0.7"});
  CHECK(phased.code == 0);
  CHECK(phased.out.find("mean_photon,0.2") != std::string::npos);
  CHECK(phased.out.find(",NA,NA\n") != std::string::npos);
}

TEST_CASE("schema") {
  const Outcome o = run({"schema"});
  REQUIRE(o.code == 0);
  const auto doc = nlohmann::json::parse(o.out);
  CHECK(doc["schema"] == cli::kSchema);
  CHECK(doc["commands"].contains("sweep"));
  CHECK(doc["masked_token"] == "ABOVE_THRESHOLD");
}

TEST_CASE("output files and the output directory") {
  const fs::path dir = scratch_dir("outdir");
  ::setenv(cli::kOutputDirEnv, dir.c_str(), 1);
  const Outcome rel = run({"photon", "--A", "0.3", "--output", "p.csv"});
  ::unsetenv(cli::kOutputDirEnv);
  REQUIRE(rel.code == 0);
  CHECK(rel.out.empty());
  CHECK(data_lines(slurp(dir / "p.csv"))[1] == "0.75");

  const fs::path abs = dir / "abs.json";
  CHECK(run({"photon", "--A", "0.3", "--output", abs.string(), "--format", "json"}).code == 0);
  CHECK(nlohmann::json::parse(slurp(abs))["rows"][0]["mean_photon"] == 0.75);

  CHECK(run({"photon", "--output", (dir / "missing" / "x.csv").string()}).code == cli::kFailure);
}

TEST_CASE("a provenance header replays as a config file") {
  const fs::path dir = scratch_dir("config");
  const Outcome first = run({"sweep", "--A", "0.99", "--eta", "1", "--axis", "omega:9:11:5", "--observable",
                             "mean_photon", "--output", (dir / "first.csv").string()});
  REQUIRE(first.code == 0);
  const Outcome replay = run({"sweep", "--config", (dir / "first.csv").string()});
  REQUIRE(replay.code == 0);
  CHECK(replay.out == slurp(dir / "first.csv"));

  // Explicit flags win over the file.
  const Outcome changed = run({"sweep", "--config", (dir / "first.csv").string(), "--A", "0.5"});
  CHECK(changed.out.find("# A=0.5\n") != std::string::npos);
  CHECK(changed.out.find("ABOVE_THRESHOLD") == std::string::npos);

  CHECK(run({"variance", "--config", (dir / "first.csv").string()}).code == cli::kInvalidInput);
  CHECK(run({"variance", "--config", (dir / "nope.cfg").string()}).code == cli::kInvalidInput);
}
