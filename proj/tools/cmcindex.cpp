#include "cmcindex/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace cmcindex;

int main(int argc, char** argv) {
  CLI::App app{"Index and variation checks for CMC surfaces"};
  std::string command;
  std::string config_file;
  std::vector<std::string> surfaces;
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool svg = false;

  app.add_option("command", command, "identity | spectrum | bounds | gallery")
      ->required()
      ->check(CLI::IsMember({"identity", "spectrum", "bounds", "gallery"}));
  app.add_option("--config", config_file, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--surface", surfaces,
                 "surface descriptor, e.g. delaunay_t3:k=2,neck=0.3 "
                 "(repeatable)");
  app.add_option("--resolution", resolution, "grid resolution N");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out, "output directory");
  app.add_flag("--svg", svg, "also write SVG spectrum plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig config;
  Command cmd;
  try {
    cmd = parse_command(command);
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("cannot parse configuration: ") + e.what());
      }
      config = RunConfig::from_json(j);
    }
    if (!surfaces.empty()) {
      config.surfaces.clear();
      for (const auto& s : surfaces) {
        config.surfaces.push_back(SurfaceDescriptor::parse(s));
      }
    }
    if (resolution) {
      if (*resolution < 8) throw ConfigError("resolution must be at least 8");
      config.resolution = resolution;
    }
    if (seed) config.seed = *seed;
    if (out) config.out = *out;
    if (svg) config.svg = true;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  CommandOutput result;
  try {
    result = run_command(cmd, config);
    write_outputs(result, config.out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  for (const auto& s : result.report["surfaces"]) {
    const bool pass = s.value("pass", false);
    std::cout << (pass ? "PASS " : "FAIL ") << s["surface"].get<std::string>()
              << '\n';
  }
  for (const auto& v : result.report["violations"]) {
    std::cerr << "violation: " << v.get<std::string>() << '\n';
  }
  std::cout << "wrote " << config.out << "/report.json\n";
  return result.exit_code();
}
