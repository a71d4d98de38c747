#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "urbanrhythm/parallel.hpp"
#include "urbanrhythm/pipeline.hpp"

namespace pl = urbanrhythm::pipeline;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("urbanrhythm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("URBANRHYTHM_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Mobility events to city states and their motifs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::size_t> threads;
  std::string out_dir;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");
  app.add_option("--out", out_dir, "Output root; each stage writes <out>/<stage>/");

  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> k_list;
  bool no_within_day = false;
  std::string events_path, usage_path;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic event log");
  synth->add_option("--seed", seed, "Generator seed");
  auto* ingest = app.add_subcommand("ingest", "Rasterize events into city images");
  ingest->add_option("--events", events_path, "Event CSV (default: <out>/synth/events.csv)");
  app.add_subcommand("features", "Saak features and reduction");
  auto* cluster = app.add_subcommand("cluster", "Ward clustering into city states");
  cluster->add_option("--k", k_list, "Cluster counts")->delimiter(',');
  auto* motifs = app.add_subcommand("motifs", "Motif classes and family graph");
  motifs->add_flag("--no-within-day", no_within_day, "Allow motifs that cross midnight");
  auto* validate = app.add_subcommand("validate", "TF-IDF association of app usage with states");
  validate->add_option("--usage", usage_path, "Usage CSV (default: <out>/synth/usage.csv)");
  app.add_subcommand("report", "Render SVG summaries");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  pipeline->add_option("--seed", seed, "Generator seed");
  pipeline->add_option("--events", events_path, "Event CSV; skips the synthetic stage");
  pipeline->add_option("--usage", usage_path, "Usage CSV");
  pipeline->add_option("--k", k_list, "Cluster counts")->delimiter(',');
  pipeline->add_flag("--no-within-day", no_within_day, "Allow motifs that cross midnight");
  app.add_subcommand("verify", "Re-hash the manifest chain under the output root");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto config = config_path.empty() ? pl::PipelineConfig::defaults() : pl::load_config(config_path);
    if (threads) config.threads = *threads;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed) config.synth.seed = *seed;
    if (!k_list.empty()) {
      config.k_list = k_list;
      if (std::find(k_list.begin(), k_list.end(), config.motif_k) == k_list.end()) config.motif_k = 0;
    }
    if (no_within_day) config.motif.within_day = false;
    if (!events_path.empty()) config.events_path = events_path;
    if (!usage_path.empty()) config.usage_path = usage_path;
    config.validate();
    urbanrhythm::set_thread_limit(config.threads);

    if (command == "synth") pl::run_synth(config);
    else if (command == "ingest") pl::run_ingest(config);
    else if (command == "features") pl::run_features(config);
    else if (command == "cluster") pl::run_cluster(config);
    else if (command == "motifs") pl::run_motifs(config);
    else if (command == "validate") pl::run_validate(config);
    else if (command == "report") pl::run_report(config);
    else if (command == "pipeline") pl::run_all(config);
    else if (command == "verify") {
      const auto problems = pl::verify_manifest_chain(config.out_dir);
      for (const auto& p : problems) std::cout << p << '\n';
      if (!problems.empty()) return 3;
      std::cout << "manifest chain ok\n";
    }
  } catch (const std::exception& e) {
    std::cerr << pl::error_document(e).dump() << std::endl;
    return 2;
  }
  return 0;
}
