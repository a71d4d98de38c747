#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "urbanrhythm/calendar.hpp"
#include "urbanrhythm/ingest.hpp"

namespace urbanrhythm::synth {

enum class Behavior { Sleep = 0, Commute = 1, Work = 2, Relax = 3, Home = 4 };
inline constexpr std::size_t kBehaviorCount = 5;

std::string_view to_string(Behavior behavior);
Behavior behavior_from_string(std::string_view text);

// Slots [begin, end) of the day follow one behaviour.
struct RegimeBlock {
  std::size_t begin = 0;
  std::size_t end = 0;
  Behavior behavior = Behavior::Sleep;
};

// Cells with row in [row_begin, row_end) and column in [col_begin, col_end).
struct Zone {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t agents = 200;
  std::size_t days = 28;
  ingest::GridSpec grid;  // end_time is derived from start_time and days
  DayTypeCalendar calendar;
  std::map<DayType, std::vector<RegimeBlock>> schedule;
  std::vector<Zone> home_zones;
  std::vector<Zone> work_zones;
  std::vector<Zone> leisure_zones;
  double observation_rate = 0.8;
  double home_wander = 0.2;   // chance of being one cell away from home in a home slot
  double relax_move = 0.35;   // chance of switching leisure venue in a relax slot
  double usage_rate = 0.3;    // app-usage events per agent per slot, before regime scaling
  std::size_t leisure_venues = 3;

  static SynthConfig defaults();
  std::size_t slots_per_day() const;
  // Throws InvalidConfig.
  void validate() const;
};

struct UsageEvent {
  std::string user_id;
  std::int64_t timestamp = 0;
  std::string app_category;
};

struct GroundTruth {
  std::vector<Behavior> regimes;       // one per slot
  std::size_t agents = 0;
  std::vector<std::int32_t> regions;   // [agent][slot], flattened i * cols + j
  // Mean leaving + arriving over commute slots divided by that over sleep
  // slots, from the true trajectories (infinite when sleep has no movement).
  double separability = 0.0;

  std::int32_t region(std::size_t agent, std::size_t slot) const { return regions[agent * regimes.size() + slot]; }
};

struct SynthOutput {
  std::vector<ingest::MobilityEvent> events;  // ordered by (timestamp, user_id)
  std::vector<UsageEvent> usage;              // ordered by (timestamp, user_id)
  GroundTruth truth;
};

const std::vector<std::string>& app_categories();

SynthOutput generate(const SynthConfig& config);

void write_truth(std::ostream& out, const GroundTruth& truth);
std::vector<Behavior> read_truth(std::istream& in);
void write_usage(std::ostream& out, const std::vector<UsageEvent>& usage);
std::vector<UsageEvent> read_usage(std::istream& in);

}  // namespace urbanrhythm::synth
