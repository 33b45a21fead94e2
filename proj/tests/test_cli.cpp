#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli/cli.hpp"
#include "cli/csv.hpp"
#include "cli/manifest.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using perdiv::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "perdiv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("perdiv_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string model_path() { return std::string(PERDIV_SOURCE_DIR) + "/configs/baseline.model"; }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("number formatting") {
  using perdiv::cli::format_number;
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-1.0 / 0.0) == "-inf");
}

TEST_CASE("value output matches the golden file") {
  const auto r = run({"value", "--model", model_path(), "--bu", "1.0", "--bl", "0.3", "--kappa", "0.06", "--x-grid",
                      "0:2:11"});
  REQUIRE(r.code == 0);
  // Residual columns carry rounding noise; pin their presence, and pin the rest exactly.
  std::istringstream got(r.out), want(slurp(std::string(PERDIV_SOURCE_DIR) + "/tests/golden/value_baseline.csv"));
  std::string g, w;
  std::getline(got, g);
  std::getline(want, w);
  CHECK(g == w);
  int rows = 0;
  while (std::getline(want, w)) {
    REQUIRE(std::getline(got, g));
    auto head = [](const std::string& line) {
      std::size_t pos = 0;
      for (int k = 0; k < 3; ++k) pos = line.find(',', pos) + 1;
      return line.substr(0, pos);
    };
    CHECK(head(g) == head(w));
    CHECK(std::count(g.begin(), g.end(), ',') == 4);
    ++rows;
  }
  CHECK(rows == 11);
  CHECK_FALSE(std::getline(got, g));
}

TEST_CASE("csv headers") {
  CHECK(first_line(run({"scale", "eval", "--model", model_path(), "--x-grid", "0:1:3"}).out) ==
        "x,W_delta,Z_delta,Z_gamma_delta,J,H");
  CHECK(first_line(run({"sweep", "--model", model_path(), "--param", "kappa", "--from", "0.01", "--to", "0.1",
                        "--steps", "2"})
                       .out) == "param,value,b_star,b_u_star,b_l_star,liquidation,status");
}

TEST_CASE("optimize prints the solution as json") {
  const auto r = run({"optimize", "--model", model_path(), "--kappa", "0.06", "--kappa0"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["b_u_star"].get<double>() == doctest::Approx(1.08770721144).epsilon(1e-9));
  CHECK(j["b_l_star"].get<double>() == doctest::Approx(0.331373547813).epsilon(1e-9));
  CHECK(j["liquidation"].get<bool>() == false);
  CHECK(std::abs(j["residuals"]["gamma"].get<double>()) <= 1e-10);
  CHECK(j["kappa0"].get<double>() == doctest::Approx(0.295701).epsilon(1e-5));
  CHECK(j["manifest_hash"].get<std::string>().size() == 16);
}

TEST_CASE("reruns are byte-identical") {
  const std::vector<std::string> opt = {"optimize", "--model", model_path(), "--kappa", "0.1"};
  CHECK(run(opt).out == run(opt).out);
  const std::vector<std::string> sim = {"simulate", "--model", model_path(), "--bu", "1.0", "--bl", "0.3",
                                        "--kappa", "0.06", "--x0", "0.5", "--paths", "500", "--seed", "4"};
  const auto a = run(sim), b = run(sim);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const std::vector<std::string> sw = {"sweep", "--model", model_path(), "--param", "gamma", "--from", "0.01",
                                       "--to", "0.1", "--steps", "4"};
  CHECK(run(sw).out == run(sw).out);
}

TEST_CASE("file output writes a manifest sidecar") {
  TempDir dir;
  const auto csv = (dir / "v.csv").string();
  const auto r = run({"value", "--model", model_path(), "--bu", "1.0", "--bl", "0.3", "--kappa", "0.06", "--out", csv});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(first_line(slurp(csv)) == "x,value,dvalue,residual_gen,residual_hjb");
  const auto m = nlohmann::json::parse(slurp(csv + ".manifest.json"));
  CHECK(m["subcommand"] == "value");
  CHECK(m["outputs"][0] == csv);
  CHECK(m.contains("wall_clock_seconds"));
}

TEST_CASE("sweep writes an svg plot") {
  TempDir dir;
  const auto svg = (dir / "s.svg").string();
  const auto r = run({"sweep", "--model", model_path(), "--param", "kappa", "--from", "0.01", "--to", "0.5", "--steps",
                      "5", "--svg", svg});
  REQUIRE(r.code == 0);
  const auto text = slurp(svg);
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);
}

TEST_CASE("verify passes at the optimum and fails after a perturbation") {
  const auto ok = run({"verify", "--model", model_path()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  const auto bad = run({"verify", "--model", model_path(), "--perturb-bu", "0.05"});
  CHECK(bad.code == perdiv::cli::kVerifyFailure);
  CHECK(bad.err.find("smoothness_gap") != std::string::npos);
}

TEST_CASE("verify in the liquidation regime") {
  const auto r = run({"verify", "--model", model_path(), "--kappa", "0.5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("liquidation_condition") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == perdiv::cli::kConfigError);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"optimize", "--model", "/nonexistent", "--kappa", "0.1"}).code == perdiv::cli::kConfigError);
  CHECK(run({"optimize", "--model", model_path(), "--kappa", "-1"}).code == perdiv::cli::kConfigError);
  CHECK(run({"value", "--model", model_path(), "--bu", "0.1", "--bl", "0.3", "--kappa", "0"}).code ==
        perdiv::cli::kConfigError);
  CHECK(run({"value", "--model", model_path(), "--bu", "1", "--bl", "0.3", "--kappa", "0", "--x-grid", "0:1"}).code ==
        perdiv::cli::kConfigError);
  CHECK(run({"sweep", "--model", model_path(), "--param", "sigma", "--from", "0", "--to", "1", "--steps", "2"}).code ==
        perdiv::cli::kConfigError);
  CHECK(run({"simulate", "--model", model_path(), "--bu", "1", "--bl", "0.3", "--kappa", "0.06", "--x0", "0.5",
             "--dt", "5"})
            .code == perdiv::cli::kConfigError);
}

TEST_CASE("manifest hash ignores wall clock") {
  perdiv::cli::RunManifest a, b;
  a.subcommand = b.subcommand = "optimize";
  a.config["kappa"] = b.config["kappa"] = 0.1;
  a.wall_clock_seconds = 1.0;
  b.wall_clock_seconds = 2.0;
  CHECK(a.hash() == b.hash());
  b.config["kappa"] = 0.2;
  CHECK(a.hash() != b.hash());
}

}
