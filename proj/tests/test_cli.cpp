#include <doctest.h>

#include "legfol/cli.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace legfol;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "legfol");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "legfol_cli_tests";
  fs::create_directories(d);
  return d;
}

std::string write_config(const std::string& name, const nlohmann::json& j) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << j.dump();
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli usage errors exit with 2") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"acs-check"}).code == cli::kUsage);
  CHECK(run({"acs-check", "--config", "/nonexistent/acs.json"}).code == cli::kUsage);
  CHECK(run({"verify-scenario", "--scenario", "s7"}).code == cli::kUsage);
  CHECK(run({"solve-disk", "--grid", "64"}).code == cli::kUsage);
  const auto bad = write_config("bad_expr.json", {{"coeffs", {{"sigma", "x1 +* 2"}}}});
  CHECK(run({"acs-check", "--config", bad}).code == cli::kUsage);
  CHECK(run({"acs-check", "--help"}).code == cli::kPass);
}

TEST_CASE("acs-check passes the standard field and names the identity a corrupted matrix breaks") {
  const auto good = write_config("standard.json", {{"builtin", "standard"}});
  const Run ok = run({"acs-check", "--config", good, "--samples", "500"});
  CHECK(ok.code == cli::kPass);
  CHECK(nlohmann::json::parse(ok.out)["pass"] == true);
  nlohmann::json corrupt{{"builtin", "standard"},
                         {"perturb_matrix", {{0, 0, 0, 0.01}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}}};
  const Run bad = run({"acs-check", "--config", write_config("corrupt.json", corrupt), "--samples", "500"});
  CHECK(bad.code == cli::kFailure);
  CHECK(bad.err.find("lagrangian") != std::string::npos);
}

TEST_CASE("solve-disk on the constant field writes a zero potential, deterministically") {
  const auto cfg = write_config("solve.json", {{"acs", {{"builtin", "standard"}}}, {"r", 1.0}});
  const fs::path a = scratch_dir() / "solve_a", b = scratch_dir() / "solve_b";
  REQUIRE(run({"solve-disk", "--config", cfg, "--grid", "33", "--out", a.string()}).code == cli::kPass);
  REQUIRE(run({"solve-disk", "--config", cfg, "--grid", "33", "--out", b.string()}).code == cli::kPass);
  CHECK(slurp(a / "diagnostics.json") == slurp(b / "diagnostics.json"));
  CHECK(slurp(a / "patch.csv") == slurp(b / "patch.csv"));
  std::ifstream is(a / "f.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "i,j,x1,y2,f");
  double worst = 0.0;
  while (std::getline(is, line)) worst = std::max(worst, std::abs(std::stod(line.substr(line.rfind(',') + 1))));
  CHECK(worst <= 1e-12);
}

TEST_CASE("intersect: flat fixtures meet once, positively, at the origin; far patch gives nothing") {
  const auto flat = write_config(
      "flat.json", {{"leaf", {{"kind", "polar"}, {"X", {0, 0}}}}, {"patch", {{"Q", {0, 0, 0, 0, 0}}, {"Y", {1, 0}}}}});
  const Run r = run({"intersect", "--config", flat, "--r", "1"});
  REQUIRE(r.code == cli::kPass);
  const auto recs = nlohmann::json::parse(r.out)["intersections"];
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["sign"] == 1);
  for (const auto& c : recs[0]["point"]) CHECK(std::abs(c.get<double>()) < 1e-9);

  const auto far = write_config(
      "far.json", {{"leaf", {{"kind", "polar"}, {"X", {0, 0}}}}, {"patch", {{"Q", {0, 0, 0, 0, 5}}, {"Y", {1, 0}}}}});
  const Run e = run({"intersect", "--config", far, "--r", "1"});
  CHECK(e.code == cli::kPass);
  CHECK(nlohmann::json::parse(e.out)["intersections"].empty());
}

TEST_CASE("leaf-of and foliate on the standard field") {
  const auto cfg = write_config("par.json", {{"kind", "parallel"}, {"X", {0.2, 0.1}}, {"t_nodes", 5}});
  const Run r = run({"leaf-of", "--config", cfg, "--samples", "3", "--r", "1"});
  CHECK(r.code == cli::kPass);
  CHECK(nlohmann::json::parse(r.out)["coverage"]["successes"] == 3);
  const fs::path out = scratch_dir() / "leaf";
  CHECK(run({"foliate", "--config", cfg, "--r", "1", "--out", out.string()}).code == cli::kPass);
  CHECK(fs::exists(out / "leaf" / "manifest.json"));
  CHECK(fs::exists(out / "leaf" / "disk_004.csv"));
}

TEST_CASE("verify-scenario reports") {
  const Run r = run({"verify-scenario", "--scenario", "n5", "--samples", "10", "--seed", "4"});
  CHECK(r.code == cli::kPass);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["max_deviation"]["comass_ambient"].get<double>() <= 1e-8);
  const Run again = run({"verify-scenario", "--scenario", "n5", "--samples", "10", "--seed", "4"});
  CHECK(again.out == r.out);
}
