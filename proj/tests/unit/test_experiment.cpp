#include <doctest.h>

#include <sstream>

#include "proxilab/experiment.hpp"
#include "proxilab/io.hpp"

using namespace proxilab;
using namespace proxilab::experiment;

namespace {

std::string transitions_bytes(const ExperimentConfig& cfg) {
  const AttackResult r = equator_attack(cfg);
  std::ostringstream out;
  io::write_transitions(out, r.set, std::optional<io::ojson>(cfg.to_json()));
  return out.str();
}

}  // namespace

TEST_CASE("config round trips through JSON") {
  ExperimentConfig cfg;
  cfg.seed = 99;
  cfg.grid_deg = 0.01;
  cfg.classes = {500, 1000, 2000};
  cfg.probe.accuracy = 5.0;
  cfg.probe.max_queries = 321;
  cfg.targets = "x.jsonl";
  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.probe.max_queries == 321);
  CHECK_THROWS_AS(ExperimentConfig::from_json(io::ojson{{"seed", "abc"}}), io::FormatError);
}

TEST_CASE("config maps onto service and probe settings") {
  ExperimentConfig cfg;
  cfg.quota = 10;
  cfg.speed_limit = 20.0;
  CHECK(cfg.service_config().policy.daily_quota == 10);
  CHECK(cfg.service_config().policy.speed_limit_mps == 20.0);
  CHECK(cfg.probe_config().seed == cfg.seed);
  CHECK(cfg.probe_config(1).seed != cfg.probe_config(2).seed);
  CHECK(cfg.probe_config(7).seed == cfg.probe_config(7).seed);
}

TEST_CASE("equal seeds give byte-identical transition files") {
  ExperimentConfig cfg;
  const std::string a = transitions_bytes(cfg);
  CHECK(a == transitions_bytes(cfg));
  cfg.seed = 2;
  CHECK(a != transitions_bytes(cfg));
}

TEST_CASE("transitions JSONL round trip") {
  const ExperimentConfig cfg;
  const AttackResult r = equator_attack(cfg);
  std::stringstream buf;
  io::write_transitions(buf, r.set, std::optional<io::ojson>(cfg.to_json()));
  const io::TransitionsFile file = io::read_transitions(buf);
  REQUIRE(file.config.has_value());
  CHECK(ExperimentConfig::from_json(*file.config).to_json() == cfg.to_json());
  REQUIRE(file.set.transitions.size() == r.set.transitions.size());
  for (std::size_t k = 0; k < r.set.transitions.size(); ++k) {
    CHECK(file.set.transitions[k].inside == r.set.transitions[k].inside);
    CHECK(file.set.transitions[k].outside == r.set.transitions[k].outside);
    CHECK(file.set.transitions[k].dir == r.set.transitions[k].dir);
  }

  std::istringstream bad("{\"config\":{}}\n\n{\"target\":\"t\",\"inside\":[0,0]}\n");
  try {
    io::read_transitions(bad);
    FAIL("expected FormatError");
  } catch (const io::FormatError& e) {
    CHECK(std::string(e.what()).rfind("line 3", 0) == 0);
  }
}

TEST_CASE("CSV writers") {
  std::ostringstream sweep;
  analysis::SweepRow row;
  row.name = "Kourou";
  row.lat = 5.154237;
  row.lon = -52.648526;
  row.l = 554.3;
  row.D = 391.9;
  io::write_sweep_csv(sweep, std::vector{row}, std::optional<io::ojson>(io::ojson{{"seed", 1}}));
  CHECK(sweep.str() ==
        "# config: {\"seed\":1}\n"
        "name,lat,lon,l_m,D_m,shape\n"
        "Kourou,5.154237,-52.648526,554.3,391.9,unknown\n");

  std::ostringstream ecdf;
  io::write_ecdf_csv(ecdf, stats::Ecdf({1.0, 2.0}));
  CHECK(ecdf.str().rfind("value,F,lo,hi\n1.000,0.500000,0.000000,", 0) == 0);
}

TEST_CASE("reference locations") {
  const auto locs = io::table1_locations();
  REQUIRE(locs.size() == 10);
  CHECK(locs.front().name == "Kourou");
  CHECK(locs.back().name == "Utqiagvik");
  for (std::size_t k = 1; k < locs.size(); ++k) CHECK(locs[k].pos.lat > locs[k - 1].pos.lat);
}

TEST_CASE("deployment study is deterministic") {
  const ExperimentConfig cfg;
  const DeploymentStudy a = deployment_study(cfg, 23.0, 10.0, 12);
  const DeploymentStudy b = deployment_study(cfg, 23.0, 10.0, 12);
  CHECK(a.failures == 0);
  REQUIRE(a.samples.size() == 12);
  CHECK(a.rho == b.rho);
  CHECK(a.offsets.right == b.offsets.right);
  for (double v : a.offsets.right) {
    CHECK(v >= a.cell - 10.0);
    CHECK(v <= 2.0 * a.cell + 10.0);
  }
}

TEST_CASE("uncertainty ratio at lat 40") {
  const UncertaintyRatio u = uncertainty_ratio({}, {40.0, 10.0});
  CHECK(u.ratio == doctest::Approx(1.0 / 9.0).epsilon(0.05));
}
