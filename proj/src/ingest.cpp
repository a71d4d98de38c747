#include "urbanrhythm/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/io.hpp"

namespace urbanrhythm::ingest {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

double meters_per_degree_lon(const GridSpec& spec) {
  return kMetersPerDegree * std::cos(spec.origin_lat * std::numbers::pi / 180.0);
}

}  // namespace

void GridSpec::validate() const {
  if (rows < 2 || cols < 2) throw Error(ErrorKind::InvalidConfig, "grid must be at least 2x2");
  if (!(cell_size_m > 0.0)) throw Error(ErrorKind::InvalidConfig, "cell_size_m must be positive");
  if (slot_duration_s <= 0) throw Error(ErrorKind::InvalidConfig, "slot_duration_s must be positive");
  if (end_time <= start_time) throw Error(ErrorKind::InvalidConfig, "end_time must follow start_time");
  if (!std::isfinite(origin_lat) || !std::isfinite(origin_lon) || std::abs(origin_lat) >= 90.0) {
    throw Error(ErrorKind::InvalidConfig, "grid origin is not a valid coordinate");
  }
}

std::size_t GridSpec::slot_count() const {
  const std::int64_t span = end_time - start_time;
  return static_cast<std::size_t>((span + slot_duration_s - 1) / slot_duration_s);
}

std::optional<std::size_t> GridSpec::slot_of(std::int64_t timestamp) const {
  if (timestamp < start_time || timestamp >= end_time) return std::nullopt;
  return static_cast<std::size_t>((timestamp - start_time) / slot_duration_s);
}

nlohmann::json to_json(const GridSpec& spec) {
  return {{"origin_lat", spec.origin_lat},   {"origin_lon", spec.origin_lon},
          {"cell_size_m", spec.cell_size_m}, {"rows", spec.rows},
          {"cols", spec.cols},               {"slot_duration_s", spec.slot_duration_s},
          {"start_time", spec.start_time},   {"end_time", spec.end_time}};
}

GridSpec grid_from_json(const nlohmann::json& doc) {
  GridSpec spec;
  try {
    spec.origin_lat = doc.at("origin_lat").get<double>();
    spec.origin_lon = doc.at("origin_lon").get<double>();
    spec.cell_size_m = doc.at("cell_size_m").get<double>();
    spec.rows = doc.at("rows").get<int>();
    spec.cols = doc.at("cols").get<int>();
    spec.slot_duration_s = doc.at("slot_duration_s").get<std::int64_t>();
    spec.start_time = doc.at("start_time").get<std::int64_t>();
    spec.end_time = doc.at("end_time").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("grid document: ") + e.what());
  }
  spec.validate();
  return spec;
}

ParseResult parse_events(std::istream& in) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  auto reject = [&](std::size_t n) {
    ++result.skipped;
    if (result.malformed_lines.size() < 10) result.malformed_lines.push_back(n);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      const auto fields = io::split(text, ',');
      if (fields.size() >= 4 && io::trim(fields[0]) == "user_id") continue;
      throw Error(ErrorKind::MalformedInput,
                  "event CSV must start with header user_id,timestamp,lat,lon[,app_category]");
    }
    const auto fields = io::split(text, ',');
    if (fields.size() != 4 && fields.size() != 5) {
      reject(line_no);
      continue;
    }
    MobilityEvent event;
    event.user_id = std::string(io::trim(fields[0]));
    if (event.user_id.empty() || !io::parse_int64(fields[1], event.timestamp) ||
        !io::parse_double(fields[2], event.lat) || !io::parse_double(fields[3], event.lon) ||
        std::abs(event.lat) > 90.0 || std::abs(event.lon) > 180.0) {
      reject(line_no);
      continue;
    }
    if (fields.size() == 5) {
      const auto category = io::trim(fields[4]);
      if (!category.empty()) event.app_category = std::string(category);
    }
    result.events.push_back(std::move(event));
  }
  if (result.events.empty()) {
    std::string message = "no valid event rows";
    if (!result.malformed_lines.empty()) {
      message += "; malformed lines:";
      for (auto n : result.malformed_lines) message += " " + std::to_string(n);
    }
    throw Error(ErrorKind::EmptyInput, message);
  }
  return result;
}

void write_events(std::ostream& out, std::span<const MobilityEvent> events) {
  const bool with_category = std::any_of(events.begin(), events.end(),
                                         [](const MobilityEvent& e) { return e.app_category.has_value(); });
  out << "user_id,timestamp,lat,lon" << (with_category ? ",app_category" : "") << '\n';
  for (const auto& e : events) {
    out << e.user_id << ',' << e.timestamp << ',' << io::format_double(e.lat) << ','
        << io::format_double(e.lon);
    if (with_category) out << ',' << e.app_category.value_or("");
    out << '\n';
  }
}

std::optional<Region> assign_region(double lat, double lon, const GridSpec& spec) {
  const double north_m = (lat - spec.origin_lat) * kMetersPerDegree;
  const double east_m = (lon - spec.origin_lon) * meters_per_degree_lon(spec);
  const double fi = std::floor(north_m / spec.cell_size_m);
  const double fj = std::floor(east_m / spec.cell_size_m);
  if (!(fi >= 0.0 && fi < spec.rows && fj >= 0.0 && fj < spec.cols)) return std::nullopt;
  return Region{static_cast<int>(fi), static_cast<int>(fj)};
}

std::pair<double, double> cell_point(const GridSpec& spec, int i, int j, double fi, double fj) {
  const double north_m = (i + fi) * spec.cell_size_m;
  const double east_m = (j + fj) * spec.cell_size_m;
  return {spec.origin_lat + north_m / kMetersPerDegree,
          spec.origin_lon + east_m / meters_per_degree_lon(spec)};
}

PresenceTable build_presence(std::span<const MobilityEvent> events, const GridSpec& spec) {
  spec.validate();
  std::map<std::string, std::size_t> index;
  for (const auto& e : events) index.emplace(e.user_id, 0);
  std::vector<std::string> users;
  users.reserve(index.size());
  for (auto& [id, slot] : index) {
    slot = users.size();
    users.push_back(id);
  }
  const std::size_t slots = spec.slot_count();
  PresenceTable table(std::move(users), slots);

  // Latest timestamp seen so far per (user, slot); later input order wins ties.
  std::vector<std::int64_t> latest(table.user_count() * slots, 0);
  for (const auto& e : events) {
    const auto slot = spec.slot_of(e.timestamp);
    if (!slot) continue;
    const auto region = assign_region(e, spec);
    if (!region) continue;
    const std::size_t user = index.at(e.user_id);
    const std::size_t cell = user * slots + *slot;
    if (table.at(user, *slot) != PresenceTable::kAbsent && e.timestamp < latest[cell]) continue;
    latest[cell] = e.timestamp;
    table.set(user, *slot, region->i * spec.cols + region->j);
  }
  return table;
}

std::uint64_t CityImageSeries::channel_total(std::size_t slot, Channel channel) const {
  std::uint64_t total = 0;
  for (std::size_t r = 0; r < spec.region_count(); ++r) total += counts[index(slot, r, channel)];
  return total;
}

CityImageSeries rasterize(const PresenceTable& presence, const GridSpec& spec) {
  CityImageSeries series(spec, presence.slot_count());
  for (std::size_t u = 0; u < presence.user_count(); ++u) {
    for (std::size_t n = 0; n < presence.slot_count(); ++n) {
      const std::int32_t here = presence.at(u, n);
      if (here == PresenceTable::kAbsent) continue;
      const std::int32_t before = n == 0 ? PresenceTable::kAbsent : presence.at(u, n - 1);
      if (before == PresenceTable::kAbsent || before == here) {
        ++series.counts[series.index(n, static_cast<std::size_t>(here), kStaying)];
      } else {
        ++series.counts[series.index(n, static_cast<std::size_t>(before), kLeaving)];
        ++series.counts[series.index(n, static_cast<std::size_t>(here), kArriving)];
      }
    }
  }
  return series;
}

void write_images(std::ostream& out, const CityImageSeries& series) {
  out << "slot,i,j,staying,leaving,arriving\n";
  const auto& spec = series.spec;
  for (std::size_t n = 0; n < series.slots; ++n) {
    for (int i = 0; i < spec.rows; ++i) {
      for (int j = 0; j < spec.cols; ++j) {
        const auto s = series.at(n, i, j, kStaying);
        const auto l = series.at(n, i, j, kLeaving);
        const auto a = series.at(n, i, j, kArriving);
        if (s == 0 && l == 0 && a == 0) continue;
        out << n << ',' << i << ',' << j << ',' << s << ',' << l << ',' << a << '\n';
      }
    }
  }
}

CityImageSeries read_images(std::istream& in, const GridSpec& spec) {
  spec.validate();
  CityImageSeries series(spec, spec.slot_count());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty() || line_no == 1) continue;
    const auto fields = io::split(text, ',');
    std::int64_t v[6];
    bool ok = fields.size() == 6;
    for (std::size_t k = 0; ok && k < 6; ++k) ok = io::parse_int64(fields[k], v[k]) && v[k] >= 0;
    if (!ok || v[0] >= static_cast<std::int64_t>(series.slots) || v[1] >= spec.rows || v[2] >= spec.cols) {
      throw Error(ErrorKind::MalformedInput, "images.csv line " + std::to_string(line_no) + " is malformed");
    }
    const std::size_t region = static_cast<std::size_t>(v[1]) * spec.cols + static_cast<std::size_t>(v[2]);
    for (std::size_t c = 0; c < 3; ++c) {
      series.counts[series.index(static_cast<std::size_t>(v[0]), region, c)] = static_cast<std::uint32_t>(v[3 + c]);
    }
  }
  return series;
}

}  // namespace urbanrhythm::ingest
