#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <algorithm>
#include <fstream>
#include <sstream>

#include "rwrslab/experiments.hpp"
#include "rwrslab/report.hpp"
#include "rwrslab/rng.hpp"

using namespace rwrslab;

TEST_CASE("experiment catalog") {
  const auto catalog = experiment_catalog();
  CHECK(catalog.size() == 11);
  for (const std::string name :
       {"bernoulli-triviality", "rotation-bicov", "rwrs-rate", "psi-bm",
        "meandering", "dcs-bounds", "berry-esseen", "invariance", "mutual-info",
        "cover-lemmas", "matching-extraction"}) {
    CHECK(std::find(catalog.begin(), catalog.end(), name) != catalog.end());
  }
}

TEST_CASE("unknown experiments fail fast with the catalog") {
  ExperimentConfig config;
  config.name = "no-such-experiment";
  try {
    run_experiment(config);
    CHECK(false);
  } catch (const std::invalid_argument& error) {
    const std::string message = error.what();
    CHECK(message.find("no-such-experiment") != std::string::npos);
    CHECK(message.find("psi-bm") != std::string::npos);
  }
}

TEST_CASE("budget overruns fail fast") {
  ExperimentConfig config;
  config.name = "psi-bm";
  config.params["count"] = 50000000;
  CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
}

TEST_CASE("psi-bm experiment emits a monotone table") {
  ExperimentConfig config;
  config.name = "psi-bm";
  config.params["count"] = 4000;
  config.params["n"] = 256;
  config.seed = 3;
  const auto records = run_experiment(config);
  REQUIRE(records.size() == 5);
  double prev = 1e18;
  for (const auto& record : records) {
    CHECK(record.metric == "psi_bm");
    CHECK(record.value < prev);
    prev = record.value;
  }
}

TEST_CASE("deterministic outputs for a fixed seed") {
  ExperimentConfig config;
  config.name = "dcs-bounds";
  config.params["cases"] = 8;
  config.seed = 17;
  const auto first = run_experiment(config);
  const auto second = run_experiment(config);
  // Byte-identical modulo the informational seconds column.
  CHECK(csv_text(first, false) == csv_text(second, false));
}

TEST_CASE("CSV writing") {
  SUBCASE("empty record list yields a header-only file") {
    const std::string text = csv_text({});
    CHECK(text == "experiment,metric,value,ci_lo,ci_hi,flags,seconds\n");
  }

  SUBCASE("fixed column order with parameter columns") {
    ReportRecord record;
    record.experiment = "demo";
    record.params = {{"N", "16"}, {"alpha", "2"}};
    record.metric = "value";
    record.value = 1.5;
    const std::string text = csv_text({record});
    CHECK(text.find("experiment,N,alpha,metric,value,ci_lo,ci_hi,flags,"
                    "seconds\n") == 0);
    CHECK(text.find("demo,16,2,value,1.5") != std::string::npos);
  }
}

TEST_CASE("JSON round trip") {
  ReportRecord record;
  record.experiment = "demo";
  record.params = {{"N", "16"}};
  record.metric = "value";
  record.value = 0.25;
  record.ci_lo = 0.2;
  record.ci_hi = 0.3;
  record.flags = "ok";
  const std::string path = "records_roundtrip.json";
  write_json({record}, path);
  std::ifstream in(path);
  nlohmann::json doc;
  in >> doc;
  REQUIRE(doc.size() == 1);
  CHECK(doc[0]["experiment"] == "demo");
  CHECK(doc[0]["params"]["N"] == "16");
  CHECK(doc[0]["value"].get<double>() == doctest::Approx(0.25));
  CHECK(doc[0]["ci_lo"].get<double>() == doctest::Approx(0.2));
  std::remove(path.c_str());
}

TEST_CASE("manifest hash tracks the config text") {
  const std::string path = "manifest_test.json";
  write_manifest(path, "{\"a\":1}", 7, 3);
  std::ifstream in(path);
  nlohmann::json first;
  in >> first;
  in.close();
  write_manifest(path, "{\"a\":2}", 7, 3);
  std::ifstream in2(path);
  nlohmann::json second;
  in2 >> second;
  CHECK(first["config_hash"] != second["config_hash"]);
  CHECK(first["seed"] == 7);
  write_manifest(path, "{\"a\":1}", 7, 3);
  std::ifstream in3(path);
  nlohmann::json third;
  in3 >> third;
  CHECK(first["config_hash"] == third["config_hash"]);
  std::remove(path.c_str());
}

TEST_CASE("process model from JSON") {
  nlohmann::json doc;
  doc["base"]["transitions"] = {{0.9, 0.1}, {0.2, 0.8}};
  doc["cocycle"]["range"] = 1;
  // Mean-zero requires pi-weighted mean 0: pi = (2/3, 1/3) -> (-1, +2).
  doc["cocycle"]["table"] = {-1.0, 2.0};
  doc["scenery"]["kind"] = "iid";
  doc["scenery"]["probs"] = {0.5, 0.5};
  const ProcessModel process = process_from_json(doc);
  CHECK(process.base.alphabet == 2);
  CHECK(process.scenery.alphabet == 2);

  nlohmann::json bad = doc;
  bad["cocycle"]["table"] = {1.0, 1.0};  // nonzero mean
  CHECK_THROWS(process_from_json(bad));
}
