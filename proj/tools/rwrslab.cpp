#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwrslab/experiments.hpp"
#include "rwrslab/report.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rwrslab: bi-covering profile laboratory for RWRS-type systems"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a named experiment");
  std::string experiment, config_path, out_dir = ".", format = "csv";
  std::uint64_t seed = 1;
  int workers = 1;
  run->add_option("--experiment", experiment, "experiment name");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "worker threads");
  run->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // list
  auto* list = app.add_subcommand("list", "print the experiment catalog");

  // verify
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite = "acceptance";
  std::vector<int> criteria;
  int verify_workers = 0;
  verify->add_option("--suite", suite, "suite name (acceptance)");
  verify->add_option("--criteria", criteria, "criterion numbers (default all)");
  verify->add_option("--workers", verify_workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& name : rwrslab::experiment_catalog())
        std::cout << name << "\n";
      return 0;
    }
    if (verify->parsed()) {
      if (suite != "acceptance") {
        std::cerr << "unknown suite '" << suite << "' (available: acceptance)\n";
        return 2;
      }
      const auto outcomes =
          rwrslab::run_acceptance(criteria, verify_workers, std::cout);
      int failures = 0;
      for (const auto& outcome : outcomes)
        if (!outcome.pass) ++failures;
      std::cout << (failures == 0 ? "ALL PASS" : "FAILURES: ")
                << (failures == 0 ? "" : std::to_string(failures)) << "\n";
      return failures == 0 ? 0 : 1;
    }

    rwrslab::ExperimentConfig config;
    std::string config_text = "{}";
    if (!config_path.empty()) {
      config_text = read_file(config_path);
      const nlohmann::json doc = nlohmann::json::parse(config_text);
      config.name = doc.value("experiment", experiment);
      config.params = doc.value("params", nlohmann::json::object());
      config.seed = doc.value("seed", seed);
      config.workers = doc.value("workers", workers);
    }
    if (!experiment.empty()) config.name = experiment;
    if (run->count("--seed")) config.seed = seed;
    if (run->count("--workers")) config.workers = workers;
    if (config.name.empty()) {
      std::cerr << "no experiment given (use --experiment or a config file)\n";
      return 2;
    }

    const auto records = rwrslab::run_experiment(config);
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/" + config.name;
    if (format == "csv")
      rwrslab::write_csv(records, base + ".csv");
    else
      rwrslab::write_json(records, base + ".json");
    rwrslab::write_manifest(base + ".manifest.json", config_text, config.seed,
                            records.size());
    std::cout << "wrote " << records.size() << " records to " << base << "."
              << format << "\n";
    return 0;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}
