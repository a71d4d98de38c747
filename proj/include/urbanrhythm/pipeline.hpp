#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "urbanrhythm/calendar.hpp"
#include "urbanrhythm/error.hpp"
#include "urbanrhythm/ingest.hpp"
#include "urbanrhythm/linalg.hpp"
#include "urbanrhythm/motif.hpp"
#include "urbanrhythm/synth.hpp"

namespace urbanrhythm::pipeline {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  ingest::GridSpec grid;
  DayTypeCalendar calendar;
  synth::SynthConfig synth;  // grid and calendar are copied in from above

  double variance_threshold = 0.03;
  std::size_t reduce_dim = 128;
  bool log_scale = false;

  std::vector<std::size_t> k_list{3, 7, 11};
  std::size_t motif_k = 0;  // 0 means the largest K in k_list
  motif::MotifParams motif;

  std::vector<DayType> ring_groups{DayType::Weekday, DayType::Weekend, DayType::Holiday};

  std::filesystem::path events_path;  // empty: use the synthetic events
  std::filesystem::path usage_path;   // empty: use the synthetic usage log
  std::filesystem::path out_dir = "out";
  std::size_t threads = 0;

  // Synthetic defaults throughout; runs with no config file.
  static PipelineConfig defaults();
  std::size_t effective_motif_k() const;
  // Throws InvalidConfig.
  void validate() const;
  nlohmann::json to_json() const;
};

// Flat INI file with [grid], [calendar], [synth], [saak], [cluster], [motif],
// [report], [paths] and [run] sections. Unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text);

// An error raised inside a named stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)), detail_(cause.what()) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string stage_;
  std::string detail_;
};

nlohmann::json error_document(const std::exception& error);

// Each stage reads the previous stages' artifacts under config.out_dir and
// writes its own directory plus manifest.json.
void run_synth(const PipelineConfig& config);
void run_ingest(const PipelineConfig& config);
void run_features(const PipelineConfig& config);
void run_cluster(const PipelineConfig& config);
void run_motifs(const PipelineConfig& config);
void run_validate(const PipelineConfig& config);
void run_report(const PipelineConfig& config);
void run_all(const PipelineConfig& config);

// Problems found while re-hashing every manifest under out_dir: outputs that
// changed on disk and inputs whose hash disagrees with the producing stage.
std::vector<std::string> verify_manifest_chain(const std::filesystem::path& out_dir);

// Stage helpers shared with the tests.
void write_matrix_csv(std::ostream& out, const linalg::DenseMatrix& m, const std::string& prefix);
linalg::DenseMatrix read_matrix_csv(std::istream& in);

}  // namespace urbanrhythm::pipeline
