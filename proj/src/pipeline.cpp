#include "urbanrhythm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "urbanrhythm/io.hpp"
#include "urbanrhythm/parallel.hpp"
#include "urbanrhythm/report.hpp"
#include "urbanrhythm/saak.hpp"
#include "urbanrhythm/states.hpp"
#include "urbanrhythm/validate.hpp"

namespace urbanrhythm::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Diagnostics go to stderr; stdout stays free for callers.
spdlog::logger& pipeline_log() {
  static const auto logger = [] {
    if (auto existing = spdlog::get("urbanrhythm")) return existing;
    return spdlog::stderr_color_mt("urbanrhythm");
  }();
  return *logger;
}

[[noreturn]] void bad_config(const std::string& message) { throw Error(ErrorKind::InvalidConfig, "config: " + message); }

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  if (!io::parse_double(io::trim(value), out)) bad_config(key + " must be a finite number, got '" + value + "'");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  if (!io::parse_int64(io::trim(value), out)) bad_config(key + " must be an integer, got '" + value + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
  const auto v = to_int(key, value);
  if (v < 0) bad_config(key + " must not be negative");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  const auto v = io::trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_config(key + " must be a boolean, got '" + value + "'");
}

std::vector<std::string> to_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto part : io::split(value, ',')) {
    const auto t = io::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"grid.origin_lat", [](auto& c, auto& k, auto& v) { c.grid.origin_lat = to_double(k, v); }},
      {"grid.origin_lon", [](auto& c, auto& k, auto& v) { c.grid.origin_lon = to_double(k, v); }},
      {"grid.cell_size_m", [](auto& c, auto& k, auto& v) { c.grid.cell_size_m = to_double(k, v); }},
      {"grid.rows", [](auto& c, auto& k, auto& v) { c.grid.rows = static_cast<int>(to_int(k, v)); }},
      {"grid.cols", [](auto& c, auto& k, auto& v) { c.grid.cols = static_cast<int>(to_int(k, v)); }},
      {"grid.slot_duration_s", [](auto& c, auto& k, auto& v) { c.grid.slot_duration_s = to_int(k, v); }},
      {"grid.start_time", [](auto& c, auto& k, auto& v) { c.grid.start_time = to_int(k, v); }},
      {"grid.end_time", [](auto& c, auto& k, auto& v) { c.grid.end_time = to_int(k, v); }},
      {"calendar.holidays",
       [](auto& c, auto&, auto& v) {
         const auto list = to_list(v);
         c.calendar = DayTypeCalendar(std::set<std::string>(list.begin(), list.end()), c.calendar.utc_offset_s());
       }},
      {"calendar.utc_offset_s",
       [](auto& c, auto& k, auto& v) { c.calendar = DayTypeCalendar(c.calendar.holidays(), to_int(k, v)); }},
      {"synth.seed", [](auto& c, auto& k, auto& v) { c.synth.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"synth.agents", [](auto& c, auto& k, auto& v) { c.synth.agents = to_size(k, v); }},
      {"synth.observation_rate", [](auto& c, auto& k, auto& v) { c.synth.observation_rate = to_double(k, v); }},
      {"synth.home_wander", [](auto& c, auto& k, auto& v) { c.synth.home_wander = to_double(k, v); }},
      {"synth.relax_move", [](auto& c, auto& k, auto& v) { c.synth.relax_move = to_double(k, v); }},
      {"synth.usage_rate", [](auto& c, auto& k, auto& v) { c.synth.usage_rate = to_double(k, v); }},
      {"synth.leisure_venues", [](auto& c, auto& k, auto& v) { c.synth.leisure_venues = to_size(k, v); }},
      {"saak.variance_threshold", [](auto& c, auto& k, auto& v) { c.variance_threshold = to_double(k, v); }},
      {"saak.reduce_dim", [](auto& c, auto& k, auto& v) { c.reduce_dim = to_size(k, v); }},
      {"saak.log_scale", [](auto& c, auto& k, auto& v) { c.log_scale = to_bool(k, v); }},
      {"cluster.k",
       [](auto& c, auto& k, auto& v) {
         c.k_list.clear();
         for (const auto& item : to_list(v)) c.k_list.push_back(to_size(k, item));
       }},
      {"motif.k", [](auto& c, auto& k, auto& v) { c.motif_k = to_size(k, v); }},
      {"motif.window_length", [](auto& c, auto& k, auto& v) { c.motif.window_length = to_size(k, v); }},
      {"motif.stride", [](auto& c, auto& k, auto& v) { c.motif.stride = to_size(k, v); }},
      {"motif.window_threshold", [](auto& c, auto& k, auto& v) { c.motif.window_threshold = to_size(k, v); }},
      {"motif.f_threshold", [](auto& c, auto& k, auto& v) { c.motif.f_threshold = to_size(k, v); }},
      {"motif.f_threshold_day", [](auto& c, auto& k, auto& v) { c.motif.f_threshold_day = to_size(k, v); }},
      {"motif.within_day", [](auto& c, auto& k, auto& v) { c.motif.within_day = to_bool(k, v); }},
      {"motif.exclude_trivial", [](auto& c, auto& k, auto& v) { c.motif.exclude_trivial = to_bool(k, v); }},
      {"motif.eps_factor", [](auto& c, auto& k, auto& v) { c.motif.eps_factor = to_double(k, v); }},
      {"motif.eps_max", [](auto& c, auto& k, auto& v) { c.motif.eps_max = to_double(k, v); }},
      {"motif.min_samples", [](auto& c, auto& k, auto& v) { c.motif.min_samples = to_size(k, v); }},
      {"report.groups",
       [](auto& c, auto&, auto& v) {
         c.ring_groups.clear();
         for (const auto& item : to_list(v)) c.ring_groups.push_back(day_type_from_string(item));
       }},
      {"paths.events", [](auto& c, auto&, auto& v) { c.events_path = std::string(io::trim(v)); }},
      {"paths.usage", [](auto& c, auto&, auto& v) { c.usage_path = std::string(io::trim(v)); }},
      {"paths.out", [](auto& c, auto&, auto& v) { c.out_dir = std::string(io::trim(v)); }},
      {"run.threads", [](auto& c, auto& k, auto& v) { c.threads = to_size(k, v); }},
  };
  return table;
}

std::string relative_name(const fs::path& p, const fs::path& root) {
  const auto rel = p.lexically_normal().lexically_relative(root.lexically_normal());
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

void write_manifest(const PipelineConfig& config, const std::string& stage, const json& parameters,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs, const json& stats = {}) {
  json doc;
  doc["stage"] = stage;
  doc["version"] = kVersion;
  doc["parameters"] = parameters;
  auto list = [&](const std::vector<fs::path>& files) {
    json arr = json::array();
    for (const auto& f : files) arr.push_back({{"path", relative_name(f, config.out_dir)}, {"sha256", io::sha256_file(f)}});
    return arr;
  };
  doc["inputs"] = list(inputs);
  doc["outputs"] = list(outputs);
  if (!stats.is_null()) doc["stats"] = stats;
  io::write_file(config.out_dir / stage / "manifest.json", doc.dump(2) + "\n");
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open " + path.generic_string());
  return in;
}

json read_json(const fs::path& path) {
  const auto text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, path.generic_string() + ": " + e.what());
  }
}

template <typename Fn>
void run_stage(const std::string& name, const PipelineConfig& config, Fn&& body) {
  if (config.threads) set_thread_limit(config.threads);
  pipeline_log().info("stage {} -> {}", name, (config.out_dir / name).generic_string());
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const json::exception& e) {
    throw StageError(name, Error(ErrorKind::MalformedInput, e.what()));
  }
}

fs::path stage_dir(const PipelineConfig& c, const char* name) { return c.out_dir / name; }

ingest::GridSpec load_grid(const PipelineConfig& c) {
  return ingest::grid_from_json(read_json(stage_dir(c, "ingest") / "grid.json"));
}

std::vector<std::int64_t> slot_times(const ingest::GridSpec& grid) {
  std::vector<std::int64_t> times(grid.slot_count());
  for (std::size_t n = 0; n < times.size(); ++n) times[n] = grid.slot_start(n);
  return times;
}

states::StateSeries load_states(const fs::path& path) {
  auto in = open_input(path);
  return states::read_state_series(in);
}

json motif_params_json(const motif::MotifParams& p) {
  return {{"window_length", p.window_length}, {"stride", p.stride},           {"window_threshold", p.window_threshold},
          {"f_threshold", p.f_threshold},     {"f_threshold_day", p.f_threshold_day}, {"within_day", p.within_day},
          {"exclude_trivial", p.exclude_trivial}, {"eps_factor", p.eps_factor}, {"eps_max", p.eps_max},
          {"min_samples", p.min_samples}};
}

synth::SynthConfig synth_config(const PipelineConfig& c) {
  synth::SynthConfig s = c.synth;
  s.grid = c.grid;
  s.calendar = c.calendar;
  const auto span = c.grid.end_time - c.grid.start_time;
  if (span <= 0 || span % 86400 != 0) bad_config("synthetic runs need a whole number of days between start and end");
  s.days = static_cast<std::size_t>(span / 86400);
  return s;
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.synth = synth::SynthConfig::defaults();
  c.grid = c.synth.grid;
  c.calendar = c.synth.calendar;
  return c;
}

std::size_t PipelineConfig::effective_motif_k() const {
  if (motif_k) return motif_k;
  return k_list.empty() ? 0 : *std::max_element(k_list.begin(), k_list.end());
}

void PipelineConfig::validate() const {
  grid.validate();
  if (!(variance_threshold >= 0.0 && variance_threshold < 1.0)) bad_config("saak.variance_threshold must lie in [0, 1)");
  if (reduce_dim == 0) bad_config("saak.reduce_dim must be positive");
  if (k_list.empty()) bad_config("cluster.k needs at least one value");
  for (auto k : k_list) {
    if (k == 0) bad_config("cluster.k values must be positive");
  }
  if (std::set<std::size_t>(k_list.begin(), k_list.end()).size() != k_list.size()) bad_config("cluster.k has duplicates");
  if (std::find(k_list.begin(), k_list.end(), effective_motif_k()) == k_list.end()) {
    bad_config("motif.k must be one of cluster.k");
  }
  if (86400 % grid.slot_duration_s != 0) bad_config("grid.slot_duration_s must divide a day");
  motif.validate();
  if (ring_groups.empty()) bad_config("report.groups needs at least one day type");
}

json PipelineConfig::to_json() const {
  json doc;
  doc["grid"] = ingest::to_json(grid);
  doc["calendar"] = {{"holidays", calendar.holidays()}, {"utc_offset_s", calendar.utc_offset_s()}};
  doc["synth"] = {{"seed", synth.seed},
                  {"agents", synth.agents},
                  {"observation_rate", synth.observation_rate},
                  {"home_wander", synth.home_wander},
                  {"relax_move", synth.relax_move},
                  {"usage_rate", synth.usage_rate},
                  {"leisure_venues", synth.leisure_venues}};
  doc["saak"] = {{"variance_threshold", variance_threshold}, {"reduce_dim", reduce_dim}, {"log_scale", log_scale}};
  doc["cluster"] = {{"k", k_list}};
  doc["motif"] = motif_params_json(motif);
  doc["motif"]["k"] = effective_motif_k();
  std::vector<std::string> groups;
  for (auto g : ring_groups) groups.emplace_back(urbanrhythm::to_string(g));
  doc["report"] = {{"groups", groups}};
  return doc;
}

PipelineConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    bad_config(e.message() + " at line " + std::to_string(e.line()));
  }
  PipelineConfig config = PipelineConfig::defaults();
  const bool grid_set_end = [&] {
    const auto g = tree.get_child_optional("grid");
    return g && g->count("end_time") > 0;
  }();
  for (const auto& [section, body] : tree) {
    if (body.empty()) bad_config("key '" + section + "' must live inside a section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto it = setters().find(name);
      if (it == setters().end()) bad_config("unknown key " + name);
      try {
        it->second(config, name, value.data());
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidConfig) throw;
        bad_config(name + ": " + e.what());
      }
    }
  }
  // A shifted start keeps the default four-week span unless end_time is given.
  if (!grid_set_end) {
    const auto defaults = PipelineConfig::defaults();
    config.grid.end_time = config.grid.start_time + (defaults.grid.end_time - defaults.grid.start_time);
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingInput, "config file " + path.generic_string() + " not found");
  return parse_config(io::read_file(path));
}

json error_document(const std::exception& error) {
  json doc;
  if (const auto* stage = dynamic_cast<const StageError*>(&error)) {
    doc["error"] = to_string(stage->kind());
    doc["stage"] = stage->stage();
    doc["message"] = stage->detail();
  } else if (const auto* e = dynamic_cast<const Error*>(&error)) {
    doc["error"] = to_string(e->kind());
    doc["stage"] = nullptr;
    doc["message"] = e->what();
  } else {
    doc["error"] = "Internal";
    doc["stage"] = nullptr;
    doc["message"] = error.what();
  }
  return doc;
}

void write_matrix_csv(std::ostream& out, const linalg::DenseMatrix& m, const std::string& prefix) {
  out << "slot";
  for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << prefix << c;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << r;
    for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << io::format_double(m(r, c));
    out << '\n';
  }
}

linalg::DenseMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, "matrix CSV is empty");
  const std::size_t cols = io::split(io::trim(line), ',').size() - 1;
  std::vector<double> values;
  std::size_t rows = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty()) continue;
    const auto fields = io::split(text, ',');
    std::int64_t slot = 0;
    if (fields.size() != cols + 1 || !io::parse_int64(fields[0], slot) || slot != static_cast<std::int64_t>(rows)) {
      throw Error(ErrorKind::MalformedInput, "matrix CSV line " + std::to_string(line_no) + " is malformed");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!io::parse_double(fields[c + 1], v)) {
        throw Error(ErrorKind::MalformedInput, "matrix CSV line " + std::to_string(line_no) + " has a bad number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::EmptyInput, "matrix CSV has no rows");
  linalg::DenseMatrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.values().begin());
  return m;
}

void run_synth(const PipelineConfig& config) {
  run_stage("synth", config, [&] {
    const auto sc = synth_config(config);
    const auto result = synth::generate(sc);
    const auto dir = stage_dir(config, "synth");
    std::ostringstream events, usage, truth;
    ingest::write_events(events, result.events);
    synth::write_usage(usage, result.usage);
    synth::write_truth(truth, result.truth);
    io::write_file(dir / "events.csv", events.str());
    io::write_file(dir / "usage.csv", usage.str());
    io::write_file(dir / "truth.csv", truth.str());
    if (result.truth.separability < 5.0) {
      pipeline_log().warn("synthetic commute/sleep movement ratio is only {:.2f}", result.truth.separability);
    }
    const json params = {{"grid", ingest::to_json(sc.grid)}, {"days", sc.days}, {"synth", config.to_json()["synth"]},
                         {"holidays", sc.calendar.holidays()}};
    write_manifest(config, "synth", params, {}, {dir / "events.csv", dir / "usage.csv", dir / "truth.csv"},
                   {{"events", result.events.size()},
                    {"usage_events", result.usage.size()},
                    {"separability", io::format_double(result.truth.separability)}});
  });
}

void run_ingest(const PipelineConfig& config) {
  run_stage("ingest", config, [&] {
    const fs::path events_path = config.events_path.empty() ? stage_dir(config, "synth") / "events.csv" : config.events_path;
    auto in = open_input(events_path);
    const auto parsed = ingest::parse_events(in);
    if (parsed.skipped) pipeline_log().warn("skipped {} malformed event rows", parsed.skipped);
    const auto presence = ingest::build_presence(parsed.events, config.grid);
    const auto images = ingest::rasterize(presence, config.grid);
    const auto dir = stage_dir(config, "ingest");
    std::ostringstream out;
    ingest::write_images(out, images);
    io::write_file(dir / "images.csv", out.str());
    io::write_file(dir / "grid.json", ingest::to_json(config.grid).dump(2) + "\n");
    write_manifest(config, "ingest", {{"grid", ingest::to_json(config.grid)}}, {events_path},
                   {dir / "images.csv", dir / "grid.json"},
                   {{"events", parsed.events.size()}, {"skipped", parsed.skipped}, {"users", presence.user_count()}});
  });
}

void run_features(const PipelineConfig& config) {
  run_stage("features", config, [&] {
    const auto in_dir = stage_dir(config, "ingest");
    const auto grid = load_grid(config);
    auto in = open_input(in_dir / "images.csv");
    const auto images = ingest::read_images(in, grid);
    saak::SaakOptions options;
    options.variance_threshold = config.variance_threshold;
    options.log_scale = config.log_scale;
    const auto fit = saak::fit_saak(images, options);
    const auto reduced = saak::reduce(fit.features, config.reduce_dim);
    const auto dir = stage_dir(config, "features");
    json model{{"saak", saak::to_json(fit.model)}, {"reduction", saak::to_json(reduced.basis)}};
    io::write_file(dir / "saak_model.json", model.dump() + "\n");
    std::ostringstream features, projection;
    write_matrix_csv(features, reduced.features, "f");
    write_matrix_csv(projection, reduced.projection, "p");
    io::write_file(dir / "features.csv", features.str());
    io::write_file(dir / "projection2d.csv", projection.str());
    write_manifest(config, "features", config.to_json()["saak"], {in_dir / "images.csv", in_dir / "grid.json"},
                   {dir / "saak_model.json", dir / "features.csv", dir / "projection2d.csv"},
                   {{"saak_dim", fit.model.feature_dim()}, {"reduced_dim", reduced.features.cols()}});
  });
}

void run_cluster(const PipelineConfig& config) {
  run_stage("cluster", config, [&] {
    const auto features_path = stage_dir(config, "features") / "features.csv";
    const auto ingest_dir = stage_dir(config, "ingest");
    auto in = open_input(features_path);
    const auto features = read_matrix_csv(in);
    const auto grid = load_grid(config);
    const auto times = slot_times(grid);
    if (times.size() != features.rows()) throw Error(ErrorKind::LengthMismatch, "feature rows do not match the grid slots");
    auto images_in = open_input(ingest_dir / "images.csv");
    const auto images = ingest::read_images(images_in, grid);

    const auto dendrogram = states::ward_cluster(features);
    const auto dir = stage_dir(config, "cluster");
    std::vector<fs::path> outputs{dir / "dendrogram.json"};
    io::write_file(dir / "dendrogram.json", states::to_json(dendrogram).dump() + "\n");
    json profiles;
    for (auto k : config.k_list) {
      const auto series = states::cut(dendrogram, k, times);
      std::ostringstream out;
      states::write_state_series(out, series);
      const auto name = "states_k" + std::to_string(k) + ".csv";
      io::write_file(dir / name, out.str());
      outputs.push_back(dir / name);
      if (k == config.effective_motif_k()) {
        io::write_file(dir / "states.csv", out.str());
        outputs.push_back(dir / "states.csv");
      }
      profiles["k" + std::to_string(k)] = states::to_json(states::profile_states(series, images, config.calendar));
    }
    std::vector<std::size_t> levels(config.k_list);
    std::sort(levels.begin(), levels.end());
    io::write_file(dir / "hierarchy.json", states::hierarchy_export(dendrogram, levels).dump() + "\n");
    io::write_file(dir / "profiles.json", profiles.dump(2) + "\n");
    outputs.push_back(dir / "hierarchy.json");
    outputs.push_back(dir / "profiles.json");
    write_manifest(config, "cluster", {{"k", config.k_list}, {"states_k", config.effective_motif_k()}},
                   {features_path, ingest_dir / "images.csv", ingest_dir / "grid.json"}, outputs);
  });
}

void run_motifs(const PipelineConfig& config) {
  run_stage("motifs", config, [&] {
    const auto states_path = stage_dir(config, "cluster") / "states.csv";
    const auto series = load_states(states_path);
    if (series.slot_times.empty()) throw Error(ErrorKind::EmptyInput, "state series is empty");
    const auto grid = load_grid(config);
    motif::MotifParams params = config.motif;
    params.slots_per_day = static_cast<std::size_t>(86400 / grid.slot_duration_s);
    params.day_offset = static_cast<std::size_t>(config.calendar.seconds_into_day(series.slot_times.front()) /
                                                 grid.slot_duration_s);
    const auto motifs = motif::discover_motifs(series.labels, params);
    const auto classes = motif::cluster_classes(motifs, params);
    const auto graph = motif::build_graph(classes);
    const auto dir = stage_dir(config, "motifs");
    io::write_file(dir / "motif_classes.json", motif::to_json(classes).dump(2) + "\n");
    io::write_file(dir / "motif_graph.json", motif::to_json(graph).dump(2) + "\n");
    io::write_file(dir / "motif_graph.dot", motif::to_dot(graph, classes));
    std::size_t motif_count = 0;
    for (const auto& [length, list] : motifs) motif_count += list.size();
    json params_doc = motif_params_json(params);
    params_doc["slots_per_day"] = params.slots_per_day;
    params_doc["day_offset"] = params.day_offset;
    write_manifest(config, "motifs", params_doc, {states_path, stage_dir(config, "ingest") / "grid.json"},
                   {dir / "motif_classes.json", dir / "motif_graph.json", dir / "motif_graph.dot"},
                   {{"motifs", motif_count}, {"classes", classes.size()}, {"edges", graph.edges.size()}});
  });
}

void run_validate(const PipelineConfig& config) {
  run_stage("validate", config, [&] {
    const auto states_path = stage_dir(config, "cluster") / "states.csv";
    const auto series = load_states(states_path);
    const auto grid = load_grid(config);
    std::vector<std::pair<std::int64_t, std::string>> usage;
    fs::path usage_path;
    if (!config.usage_path.empty() || config.events_path.empty()) {
      usage_path = config.usage_path.empty() ? stage_dir(config, "synth") / "usage.csv" : config.usage_path;
      auto in = open_input(usage_path);
      for (auto& u : synth::read_usage(in)) usage.emplace_back(u.timestamp, std::move(u.app_category));
    } else {
      usage_path = config.events_path;
      auto in = open_input(usage_path);
      for (auto& e : ingest::parse_events(in).events) {
        if (e.app_category && !e.app_category->empty()) usage.emplace_back(e.timestamp, *e.app_category);
      }
    }
    std::set<std::string> apps;
    for (const auto& [t, app] : usage) apps.insert(app);
    if (apps.empty()) throw Error(ErrorKind::EmptyInput, "no app usage records");
    validate::UsageMatrix matrix;
    matrix.apps.assign(apps.begin(), apps.end());
    for (std::size_t s = 0; s < series.k; ++s) matrix.states.push_back("s" + std::to_string(s));
    matrix.counts = linalg::DenseMatrix(matrix.apps.size(), series.k);
    std::map<std::string, std::size_t> app_index;
    for (std::size_t a = 0; a < matrix.apps.size(); ++a) app_index[matrix.apps[a]] = a;
    std::size_t outside = 0;
    for (const auto& [t, app] : usage) {
      const auto slot = grid.slot_of(t);
      if (!slot || *slot >= series.labels.size()) {
        ++outside;
        continue;
      }
      matrix.counts(app_index.at(app), static_cast<std::size_t>(series.labels[*slot])) += 1.0;
    }
    const auto scores = validate::tfidf(matrix);
    const auto dir = stage_dir(config, "validate");
    std::ostringstream counts, csv, md;
    validate::write_usage_counts(counts, matrix);
    validate::write_scores_csv(csv, matrix, scores);
    validate::write_scores_markdown(md, matrix, scores);
    io::write_file(dir / "usage_by_state.csv", counts.str());
    io::write_file(dir / "tfidf.csv", csv.str());
    io::write_file(dir / "tfidf.md", md.str());
    write_manifest(config, "validate", {{"states_k", series.k}}, {usage_path, states_path, stage_dir(config, "ingest") / "grid.json"},
                   {dir / "usage_by_state.csv", dir / "tfidf.csv", dir / "tfidf.md"},
                   {{"records", usage.size()}, {"outside_window", outside}});
  });
}

void run_report(const PipelineConfig& config) {
  run_stage("report", config, [&] {
    const auto states_path = stage_dir(config, "cluster") / "states.csv";
    const auto projection_path = stage_dir(config, "features") / "projection2d.csv";
    const auto series = load_states(states_path);
    const auto grid = load_grid(config);
    auto in = open_input(projection_path);
    const auto projection = read_matrix_csv(in);
    const auto dir = stage_dir(config, "report");
    io::write_file(dir / "strip.svg", report::render_strip(series, config.calendar, grid.slot_duration_s));
    io::write_file(dir / "rings.svg", report::render_rings(series, config.calendar, config.ring_groups, grid.slot_duration_s));
    io::write_file(dir / "scatter.svg", report::render_scatter(projection, series.labels));
    write_manifest(config, "report", config.to_json()["report"],
                   {states_path, projection_path, stage_dir(config, "ingest") / "grid.json"},
                   {dir / "strip.svg", dir / "rings.svg", dir / "scatter.svg"});
  });
}

void run_all(const PipelineConfig& config) {
  config.validate();
  if (config.events_path.empty()) run_synth(config);
  run_ingest(config);
  run_features(config);
  run_cluster(config);
  run_motifs(config);
  if (config.events_path.empty() || !config.usage_path.empty()) {
    run_validate(config);
  } else {
    // User events may carry no app categories at all; validation is optional then.
    try {
      run_validate(config);
    } catch (const StageError& e) {
      if (e.kind() != ErrorKind::EmptyInput) throw;
      pipeline_log().warn("skipping validate: {}", e.detail());
    }
  }
  run_report(config);
}

std::vector<std::string> verify_manifest_chain(const fs::path& out_dir) {
  std::vector<std::string> problems;
  std::map<std::string, std::string> produced;
  bool any = false;
  for (const char* stage : {"synth", "ingest", "features", "cluster", "motifs", "validate", "report"}) {
    const auto manifest = out_dir / stage / "manifest.json";
    if (!fs::exists(manifest)) continue;
    any = true;
    const auto doc = read_json(manifest);
    auto resolve = [&](const std::string& p) {
      const fs::path path(p);
      return path.is_absolute() || !fs::exists(out_dir / path) ? path : out_dir / path;
    };
    for (const auto& entry : doc.at("inputs")) {
      const auto p = entry.at("path").get<std::string>();
      const auto hash = entry.at("sha256").get<std::string>();
      if (const auto it = produced.find(p); it != produced.end()) {
        if (it->second != hash) problems.push_back(std::string(stage) + ": input " + p + " differs from its producer");
      } else if (fs::exists(resolve(p)) && io::sha256_file(resolve(p)) != hash) {
        problems.push_back(std::string(stage) + ": input " + p + " changed on disk");
      }
    }
    for (const auto& entry : doc.at("outputs")) {
      const auto p = entry.at("path").get<std::string>();
      const auto hash = entry.at("sha256").get<std::string>();
      if (!fs::exists(out_dir / p)) {
        problems.push_back(std::string(stage) + ": output " + p + " is missing");
      } else if (io::sha256_file(out_dir / p) != hash) {
        problems.push_back(std::string(stage) + ": output " + p + " changed on disk");
      }
      produced[p] = hash;
    }
  }
  if (!any) problems.push_back("no manifests under " + out_dir.generic_string());
  return problems;
}

}  // namespace urbanrhythm::pipeline
