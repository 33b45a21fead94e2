#include <sstream>

#include "doctest.h"
#include "perdiv/errors.hpp"
#include "perdiv/model_io.hpp"
#include "support/oracles.hpp"

using namespace perdiv;

namespace {

ModelFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in, "test");
}

const char* kBaseline =
    "# baseline\n"
    "drift_c = 0.027\n"
    "sigma = 0.09\n"
    "jump_rate_1 = 1\n"
    "jump_scale_1 = 33.33   # trailing comment\n"
    "gamma = 0.04\n"
    "delta = 0.003\n";

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("parses the baseline") {
  const auto mf = parse(kBaseline);
  CHECK(mf.model == testsupport::baseline_model());
  CHECK(mf.time_pref == testsupport::baseline_tp());
}

TEST_CASE("format then parse round-trips") {
  ModelFile mf{testsupport::two_phase_model(), {0.1, 0.01}};
  const auto back = parse(format_model(mf));
  CHECK(back.model == mf.model);
  CHECK(back.time_pref == mf.time_pref);
}

TEST_CASE("rejects malformed input") {
  CHECK_THROWS_AS(parse("drift_c = 0.027\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kBaseline) + "sigma = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kBaseline) + "colour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kBaseline) + "jump_rate_3 = 1\njump_scale_3 = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kBaseline) + "no equals sign\n"), ConfigError);
  std::string bad = kBaseline;
  bad.replace(bad.find("0.09"), 4, "abc");
  CHECK_THROWS_AS(parse(bad), ConfigError);
  std::string neg = kBaseline;
  neg.replace(neg.find("0.04"), 4, "-1.0");
  CHECK_THROWS_AS(parse(neg), ConfigError);
}

TEST_CASE("unknown keys name the valid ones") {
  try {
    parse(std::string(kBaseline) + "colour = red\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("colour") != std::string::npos);
    CHECK(msg.find("drift_c") != std::string::npos);
  }
}

TEST_CASE("parse_real is strict") {
  CHECK(parse_real("1.5e-3", "x") == 1.5e-3);
  CHECK_THROWS_AS(parse_real("1.5x", "x"), ConfigError);
  CHECK_THROWS_AS(parse_real("", "x"), ConfigError);
  CHECK_THROWS_AS(parse_real("nan", "x"), ConfigError);
  CHECK_THROWS_AS(parse_real("inf", "x"), ConfigError);
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_model_file("/nonexistent/model"), ConfigError); }

}
