#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "urbanrhythm/calendar.hpp"
#include "urbanrhythm/ingest.hpp"
#include "urbanrhythm/linalg.hpp"

namespace urbanrhythm::states {

// One agglomeration step. Leaves are nodes 0..N-1; the k-th merge creates
// node N + k.
struct Merge {
  std::size_t left = 0;   // smaller node id
  std::size_t right = 0;  // larger node id
  double cost = 0.0;      // Ward increase |A||B|/(|A|+|B|) * ||cA - cB||^2
  std::size_t size = 0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;
};

nlohmann::json to_json(const Dendrogram& dendrogram);
Dendrogram dendrogram_from_json(const nlohmann::json& doc);

// Exact Ward agglomeration via the Lance-Williams recurrence. Ties go to the
// smallest (left, right) node pair.
Dendrogram ward_cluster(const linalg::DenseMatrix& features);

struct StateSeries {
  std::size_t k = 0;
  std::vector<int> labels;
  std::vector<std::int64_t> slot_times;
};

// Undoes the last k - 1 merges; states are numbered by first occurrence.
StateSeries cut(const Dendrogram& dendrogram, std::size_t k, std::span<const std::int64_t> slot_times = {});

// Levels must be strictly increasing. Each cluster records its size and the
// cluster that contains it at the previous level.
nlohmann::json hierarchy_export(const Dendrogram& dendrogram, std::span<const std::size_t> levels);

void write_state_series(std::ostream& out, const StateSeries& series);
StateSeries read_state_series(std::istream& in);

struct StateProfile {
  int state = 0;
  std::size_t slot_count = 0;
  std::array<double, 3> channel_means{};  // mean per-slot totals: staying, leaving, arriving
  std::vector<std::size_t> slot_of_day;   // histogram over slots of the day
  std::array<std::size_t, 3> day_types{}; // weekday, weekend, holiday
};

std::vector<StateProfile> profile_states(const StateSeries& series, const ingest::CityImageSeries& images,
                                         const DayTypeCalendar& calendar);
nlohmann::json to_json(const std::vector<StateProfile>& profiles);

}  // namespace urbanrhythm::states
