#include <catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include <vlcsim/config.hpp>

using namespace vlcsim;
using Catch::Matchers::ContainsSubstring;

namespace {

ExperimentSpec parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_spec(in);
}

std::string error_of(const std::string& text) {
  try {
    parse_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return std::string();
}

}  // namespace

TEST_CASE("defaults") {
  const ExperimentSpec spec;
  REQUIRE(spec.family == "eara");
  REQUIRE(spec.e == 1);
  REQUIRE(spec.z == 900);
  REQUIRE(spec.g1 == 20);
  REQUIRE(spec.g2 == 4);
  REQUIRE(spec.kind == GsmKind::SserGsm);
  REQUIRE(spec.gsm.n_tx == 4);
  REQUIRE(spec.gsm.upam_order == 2);
  REQUIRE(spec.geom.d_tx == 0.5);
  REQUIRE(spec.samples == 200000);
  REQUIRE(spec.workers == 1);
  REQUIRE_FALSE(spec.osnr.set);
}

TEST_CASE("sectioned keys land on the right fields") {
  const ExperimentSpec spec = parse_text(
      "[code]\n"
      "family = ar4ja\n"
      "e = 0\n"
      "Z = 1800\n"
      "[gsm]\n"
      "N_t = 4\n"
      "N_a = 2\n"
      "M = 4\n"
      "kind = congsm\n"
      "[channel]\n"
      "d_tx = 0.7\n"
      "psi_half = 55\n"
      "[link]\n"
      "g1 = 10\n"
      "g2 = 2\n"
      "algo = logmap\n"
      "seed = 42\n"
      "osnr = 4:6:0.5\n"
      "frames = 500\n"
      "[analysis]\n"
      "samples = 1000\n");
  REQUIRE(spec.family == "ar4ja");
  REQUIRE(spec.e == 0);
  REQUIRE(spec.z == 1800);
  REQUIRE(spec.gsm.upam_order == 4);
  REQUIRE(spec.kind == GsmKind::ConGsm);
  REQUIRE(spec.geom.d_tx == 0.7);
  REQUIRE(spec.g1 == 10);
  REQUIRE(spec.g2 == 2);
  REQUIRE(spec.algo == DemapAlgo::LogMap);
  REQUIRE(spec.seed == 42);
  REQUIRE(spec.stop.max_frames == 500);
  REQUIRE(spec.osnr.set);
  REQUIRE(spec.osnr.values() == std::vector<double>{4.0, 4.5, 5.0, 5.5, 6.0});
  REQUIRE(spec.samples == 1000);
}

TEST_CASE("comments and blank lines are skipped") {
  const ExperimentSpec spec = parse_text(
      "# a comment\n"
      "\n"
      "; another\n"
      "[code]\n"
      "Z = 64\n");
  REQUIRE(spec.z == 64);
}

TEST_CASE("unknown keys are hard errors that name the key") {
  const std::string msg = error_of("[gsm]\nfoo = 1\n");
  REQUIRE_THAT(msg, ContainsSubstring("unknown config key 'foo'"));
  REQUIRE_THAT(msg, ContainsSubstring("[gsm]"));
  const std::string top = error_of("bar = 2\n");
  REQUIRE_THAT(top, ContainsSubstring("unknown config key 'bar'"));
}

TEST_CASE("malformed values are reported with the offending text") {
  const std::string msg = error_of("[code]\nZ = banana\n");
  REQUIRE_THAT(msg, ContainsSubstring("cannot parse value 'banana'"));
  REQUIRE_THAT(msg, ContainsSubstring("Z"));
  REQUIRE_THAT(error_of("[link]\nalgo = fast\n"),
               ContainsSubstring("expected maxlog|logmap"));
  std::istringstream bad_line("[code\nZ = 4\n");
  REQUIRE_THROWS_AS(parse_spec(bad_line), std::invalid_argument);
  std::istringstream no_eq("[code]\njust words\n");
  REQUIRE_THROWS_AS(parse_spec(no_eq), std::invalid_argument);
}

TEST_CASE("osnr grammar") {
  const OsnrGrid single = parse_osnr("7.25");
  REQUIRE(single.values() == std::vector<double>{7.25});
  const OsnrGrid range = parse_osnr("4:6:1");
  REQUIRE(range.values() == std::vector<double>{4.0, 5.0, 6.0});
  REQUIRE_THROWS_AS(parse_osnr("6:4:1"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_osnr("4:6:0"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_osnr("4:6"), std::invalid_argument);
}

TEST_CASE("mode names") {
  REQUIRE(mode_from_string("ber-sweep") == Mode::BerSweep);
  REQUIRE(mode_from_string("ami-sweep") == Mode::AmiSweep);
  REQUIRE(mode_from_string("exit-transfer") == Mode::ExitTransfer);
  REQUIRE(mode_from_string("threshold") == Mode::Threshold);
  REQUIRE(mode_from_string("table-dump") == Mode::TableDump);
  REQUIRE(mode_from_string("complexity") == Mode::Complexity);
  REQUIRE_THROWS_AS(mode_from_string("bogus"), std::invalid_argument);
  for (Mode m : {Mode::BerSweep, Mode::AmiSweep, Mode::ExitTransfer, Mode::Threshold,
                 Mode::TableDump, Mode::Complexity})
    REQUIRE(mode_from_string(to_string(m)) == m);
}

TEST_CASE("semantic validation catches inconsistent experiments") {
  ExperimentSpec bad_gsm;
  bad_gsm.gsm.n_active = 5;  // exceeds the 4 LEDs
  const auto gsm_issues = validate_spec(bad_gsm);
  REQUIRE_FALSE(gsm_issues.empty());
  REQUIRE_THAT(gsm_issues[0], ContainsSubstring("N_a"));

  ExperimentSpec undiv;
  undiv.mode = Mode::BerSweep;
  undiv.family = "regular";
  undiv.z = 601;
  undiv.osnr = parse_osnr("6");
  bool found = false;
  for (const auto& issue : validate_spec(undiv))
    if (issue.find("5409") != std::string::npos &&
        issue.find("rho = 4") != std::string::npos)
      found = true;
  REQUIRE(found);  // names both the transmitted length and the divisor

  ExperimentSpec odd_z;
  odd_z.mode = Mode::BerSweep;
  odd_z.family = "eara";
  odd_z.z = 902;  // parallel edges need Z divisible by 4
  odd_z.osnr = parse_osnr("6");
  bool div4 = false;
  for (const auto& issue : validate_spec(odd_z))
    if (issue.find("divisible by 4") != std::string::npos) div4 = true;
  REQUIRE(div4);

  ExperimentSpec no_osnr;
  no_osnr.mode = Mode::Threshold;
  REQUIRE_FALSE(validate_spec(no_osnr).empty());

  ExperimentSpec flat_bracket;
  flat_bracket.mode = Mode::Threshold;
  flat_bracket.osnr = parse_osnr("6");
  bool bracket = false;
  for (const auto& issue : validate_spec(flat_bracket))
    if (issue.find("lo < hi") != std::string::npos) bracket = true;
  REQUIRE(bracket);

  ExperimentSpec no_iters;
  no_iters.mode = Mode::Complexity;
  REQUIRE(validate_spec(no_iters).size() >= 2);  // t1 and t2 both missing

  ExperimentSpec ok;
  ok.mode = Mode::BerSweep;
  ok.osnr = parse_osnr("6:8:1");
  REQUIRE(validate_spec(ok).empty());
}

TEST_CASE("info length cross-check") {
  ExperimentSpec spec;
  spec.mode = Mode::BerSweep;
  spec.family = "eara";
  spec.e = 1;
  spec.z = 900;
  spec.osnr = parse_osnr("6");
  spec.info_len = 9999;  // (7-3)*900 = 3600, so this must be flagged
  const auto issues = validate_spec(spec);
  REQUIRE(issues.size() == 1);
  REQUIRE_THAT(issues[0], ContainsSubstring("9999"));
  REQUIRE_THAT(issues[0], ContainsSubstring("3600"));
  spec.info_len = 3600;
  REQUIRE(validate_spec(spec).empty());
  spec.info_len = -1;  // unset: no cross-check
  REQUIRE(validate_spec(spec).empty());
}

TEST_CASE("link config projection") {
  ExperimentSpec spec;
  spec.family = "ar4ja";
  spec.e = 0;
  spec.z = 1800;
  spec.gsm.n_tx = 4;
  spec.kind = GsmKind::ConGsm;
  spec.g1 = 15;
  spec.seed = 9;
  const LinkConfig cfg = to_link_config(spec);
  REQUIRE(cfg.base.family == "ar4ja");
  REQUIRE(cfg.z == 1800);
  REQUIRE(cfg.kind == GsmKind::ConGsm);
  REQUIRE(cfg.g1 == 15);
  REQUIRE(cfg.seed == 9);
  REQUIRE(cfg.geom.n_tx == 4);
}

TEST_CASE("config echo reparses to an identical echo") {
  ExperimentSpec spec;
  spec.mode = Mode::BerSweep;
  spec.family = "ar4a";
  spec.e = 0;
  spec.z = 1800;
  spec.gsm.upam_order = 4;
  spec.kind = GsmKind::ConGsm;
  spec.geom.d_tx = 0.3;
  spec.g1 = 25;
  spec.g2 = 3;
  spec.seed = 77;
  spec.osnr = parse_osnr("5:9:0.5");
  spec.t1 = 12.5;
  spec.t2 = 1.75;

  std::ostringstream first;
  write_config_echo(first, spec);

  // strip the leading '# ' from every line and feed it back through the parser
  std::string stripped;
  std::istringstream lines(first.str());
  std::string line;
  while (std::getline(lines, line)) stripped += line.substr(2) + "\n";
  const ExperimentSpec reparsed = parse_text(stripped);

  std::ostringstream second;
  write_config_echo(second, reparsed);
  REQUIRE(second.str() == first.str());
  REQUIRE(reparsed.mode == Mode::BerSweep);
  REQUIRE(reparsed.geom.d_tx == 0.3);
}

TEST_CASE("double formatting survives a round trip") {
  for (double v : {0.1, 0.5, 1.0 / 3.0, 7e-6, 1234.5678, 1e-150}) {
    REQUIRE(std::stod(fmt_double(v)) == v);
  }
  REQUIRE(fmt_double(0.5) == "0.5");
}

TEST_CASE("missing config file is an error") {
  REQUIRE_THROWS_AS(parse_spec_file("/nonexistent/path.ini"), std::runtime_error);
}
