#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace urbanrhythm::ingest {

struct GridSpec {
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  double cell_size_m = 1000.0;
  int rows = 2;  // X, along northing
  int cols = 2;  // Y, along easting
  std::int64_t slot_duration_s = 1800;
  std::int64_t start_time = 0;
  std::int64_t end_time = 1800;

  // Throws InvalidConfig when the invariants do not hold.
  void validate() const;
  std::size_t slot_count() const;
  std::size_t region_count() const { return static_cast<std::size_t>(rows) * cols; }
  std::int64_t slot_start(std::size_t slot) const {
    return start_time + static_cast<std::int64_t>(slot) * slot_duration_s;
  }
  std::optional<std::size_t> slot_of(std::int64_t timestamp) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

nlohmann::json to_json(const GridSpec& spec);
GridSpec grid_from_json(const nlohmann::json& doc);

struct MobilityEvent {
  std::string user_id;
  std::int64_t timestamp = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<std::string> app_category;

  friend bool operator==(const MobilityEvent&, const MobilityEvent&) = default;
};

struct ParseResult {
  std::vector<MobilityEvent> events;
  std::size_t skipped = 0;
  std::vector<std::size_t> malformed_lines;  // first 10, 1-based
};

// Reads `user_id,timestamp,lat,lon[,app_category]` with a header row.
// Malformed rows are skipped and counted; throws EmptyInput when nothing
// valid remains.
ParseResult parse_events(std::istream& in);
void write_events(std::ostream& out, std::span<const MobilityEvent> events);

struct Region {
  int i = 0;
  int j = 0;
  friend bool operator==(const Region&, const Region&) = default;
};

// Equirectangular projection around the grid origin; nullopt is OutOfBounds.
std::optional<Region> assign_region(double lat, double lon, const GridSpec& spec);
inline std::optional<Region> assign_region(const MobilityEvent& event, const GridSpec& spec) {
  return assign_region(event.lat, event.lon, spec);
}
// Inverse of the projection: coordinates of a point at fractional offsets
// (fi, fj) in [0, 1) inside cell (i, j).
std::pair<double, double> cell_point(const GridSpec& spec, int i, int j, double fi, double fj);

// Region (flattened i * cols + j) of each user in each slot, or kAbsent.
class PresenceTable {
 public:
  static constexpr std::int32_t kAbsent = -1;

  PresenceTable() = default;
  PresenceTable(std::vector<std::string> users, std::size_t slots)
      : users_(std::move(users)), slots_(slots), cells_(users_.size() * slots, kAbsent) {}

  std::size_t user_count() const { return users_.size(); }
  std::size_t slot_count() const { return slots_; }
  const std::vector<std::string>& users() const { return users_; }

  std::int32_t at(std::size_t user, std::size_t slot) const { return cells_[user * slots_ + slot]; }
  void set(std::size_t user, std::size_t slot, std::int32_t region) { cells_[user * slots_ + slot] = region; }

 private:
  std::vector<std::string> users_;
  std::size_t slots_ = 0;
  std::vector<std::int32_t> cells_;
};

// Last in-bounds event per (user, slot) wins; latest timestamp first, then
// input order. Users are indexed in lexicographic id order.
PresenceTable build_presence(std::span<const MobilityEvent> events, const GridSpec& spec);

enum Channel : std::size_t { kStaying = 0, kLeaving = 1, kArriving = 2 };

struct CityImageSeries {
  GridSpec spec;
  std::size_t slots = 0;
  std::vector<std::uint32_t> counts;  // [slot][i][j][channel]

  CityImageSeries() = default;
  CityImageSeries(GridSpec grid, std::size_t slot_count)
      : spec(grid), slots(slot_count), counts(slot_count * grid.region_count() * 3, 0) {}

  std::size_t index(std::size_t slot, std::size_t region, std::size_t channel) const {
    return (slot * spec.region_count() + region) * 3 + channel;
  }
  std::uint32_t at(std::size_t slot, int i, int j, Channel channel) const {
    return counts[index(slot, static_cast<std::size_t>(i) * spec.cols + j, channel)];
  }
  std::uint64_t channel_total(std::size_t slot, Channel channel) const;

  friend bool operator==(const CityImageSeries&, const CityImageSeries&) = default;
};

CityImageSeries rasterize(const PresenceTable& presence, const GridSpec& spec);

// `slot,i,j,staying,leaving,arriving`, all-zero cells omitted.
void write_images(std::ostream& out, const CityImageSeries& series);
CityImageSeries read_images(std::istream& in, const GridSpec& spec);

}  // namespace urbanrhythm::ingest
