#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/ingest.hpp"
#include "urbanrhythm/synth.hpp"

using namespace urbanrhythm;
using namespace urbanrhythm::ingest;

namespace {

GridSpec small_grid() {
  GridSpec g;
  g.origin_lat = 31.0;
  g.origin_lon = 121.0;
  g.cell_size_m = 500.0;
  g.rows = 6;
  g.cols = 5;
  g.slot_duration_s = 1800;
  g.start_time = 1000000;
  g.end_time = g.start_time + 10 * 1800;
  return g;
}

// Offsets in metres to degrees on a sphere of mean Earth radius.
std::pair<double, double> offset(const GridSpec& g, double north_m, double east_m) {
  constexpr double r = 6371008.8;
  const double dlat = north_m / r * 180.0 / std::numbers::pi;
  const double dlon = east_m / (r * std::cos(g.origin_lat * std::numbers::pi / 180.0)) * 180.0 / std::numbers::pi;
  return {g.origin_lat + dlat, g.origin_lon + dlon};
}

}  // namespace

TEST(Ingest, GridValidation) {
  auto g = small_grid();
  EXPECT_EQ(g.slot_count(), 10u);
  g.end_time += 1;
  EXPECT_EQ(g.slot_count(), 11u);
  g.rows = 1;
  EXPECT_THROW(g.validate(), Error);
  g = small_grid();
  g.cell_size_m = 0;
  EXPECT_THROW(g.validate(), Error);
  g = small_grid();
  g.end_time = g.start_time;
  EXPECT_THROW(g.validate(), Error);
  EXPECT_EQ(grid_from_json(to_json(small_grid())), small_grid());
}

TEST(Ingest, ParseValidRows) {
  std::istringstream in("user_id,timestamp,lat,lon\nu1,1000000,31.0,121.0\nu2,1000100,31.001,121.002\n");
  const auto r = parse_events(in);
  ASSERT_EQ(r.events.size(), 2u);
  EXPECT_EQ(r.skipped, 0u);
  EXPECT_EQ(r.events[1].user_id, "u2");
  EXPECT_EQ(r.events[1].timestamp, 1000100);
  EXPECT_FALSE(r.events[0].app_category.has_value());
}

TEST(Ingest, ParseSkipsMalformed) {
  std::istringstream in(
      "user_id,timestamp,lat,lon,app_category\n"
      "u1,1000000,abc,121.0,Video\n"
      "u1,1000000,31.0,121.0,Video\n"
      "u2,notatime,31.0,121.0\n"
      "u3,5,31.0\n");
  const auto r = parse_events(in);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.skipped, 3u);
  EXPECT_EQ(r.malformed_lines, (std::vector<std::size_t>{2, 4, 5}));
  EXPECT_EQ(r.events[0].app_category, std::optional<std::string>("Video"));
}

TEST(Ingest, ParseErrors) {
  std::istringstream only_bad("user_id,timestamp,lat,lon\nx,y,z,w\n");
  try {
    parse_events(only_bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
  std::istringstream no_header("u1,1000000,31.0,121.0\n");
  EXPECT_THROW(parse_events(no_header), Error);
}

TEST(Ingest, MalformedLineReportCapsAtTen) {
  std::string text = "user_id,timestamp,lat,lon\n";
  for (int i = 0; i < 15; ++i) text += "bad\n";
  text += "u,1,2,3\n";
  std::istringstream in(text);
  const auto r = parse_events(in);
  EXPECT_EQ(r.skipped, 15u);
  EXPECT_EQ(r.malformed_lines.size(), 10u);
  EXPECT_EQ(r.malformed_lines.front(), 2u);
}

TEST(Ingest, SyntheticRoundTrip) {
  auto config = synth::SynthConfig::defaults();
  config.agents = 5;
  config.days = 3;
  config.grid.end_time = config.grid.start_time + 3 * 86400;
  auto events = synth::generate(config).events;
  ASSERT_GE(events.size(), 500u);
  events.resize(std::min<std::size_t>(events.size(), 1000));
  std::stringstream buf;
  write_events(buf, events);
  const auto back = parse_events(buf);
  EXPECT_EQ(back.skipped, 0u);
  EXPECT_EQ(back.events, events);
}

TEST(Ingest, AssignRegion) {
  const auto g = small_grid();
  EXPECT_EQ(assign_region(g.origin_lat, g.origin_lon, g), (Region{0, 0}));
  const auto [lat, lon] = offset(g, 1.5 * g.cell_size_m, 2.5 * g.cell_size_m);
  EXPECT_EQ(assign_region(lat, lon, g), (Region{1, 2}));
  const auto [wlat, wlon] = offset(g, 10.0, -1.0);
  EXPECT_FALSE(assign_region(wlat, wlon, g).has_value());
  const auto [flat, flon] = offset(g, 6 * g.cell_size_m + 1.0, 10.0);
  EXPECT_FALSE(assign_region(flat, flon, g).has_value());
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j) {
      const auto [clat, clon] = cell_point(g, i, j, 0.5, 0.5);
      EXPECT_EQ(assign_region(clat, clon, g), (Region{i, j}));
    }
}

TEST(Ingest, PresenceLastEventWins) {
  const auto g = small_grid();
  const auto a = cell_point(g, 1, 1, 0.5, 0.5);
  const auto b = cell_point(g, 4, 3, 0.5, 0.5);
  const std::int64_t slot3 = g.slot_start(3);
  std::vector<MobilityEvent> events{
      {"u", slot3 + 100, a.first, a.second, {}},
      {"u", slot3 + 200, b.first, b.second, {}},
      {"v", slot3 + 50, b.first, b.second, {}},
      {"v", slot3 + 10, a.first, a.second, {}},  // earlier timestamp, arrives later
      {"w", slot3 + 5, a.first, a.second, {}},
      {"w", slot3 + 5, b.first, b.second, {}},   // equal timestamp, later input wins
  };
  const auto p = build_presence(events, g);
  ASSERT_EQ(p.users(), (std::vector<std::string>{"u", "v", "w"}));
  const std::int32_t rb = 4 * g.cols + 3;
  EXPECT_EQ(p.at(0, 3), rb);
  EXPECT_EQ(p.at(1, 3), rb);
  EXPECT_EQ(p.at(2, 3), rb);
  for (std::size_t n = 0; n < g.slot_count(); ++n)
    if (n != 3) {
      EXPECT_EQ(p.at(0, n), PresenceTable::kAbsent);
    }
}

TEST(Ingest, PresenceMatchesGroupByOracle) {
  const auto g = small_grid();
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<MobilityEvent> events;
    std::uniform_int_distribution<std::int64_t> time(g.start_time - 1000, g.end_time + 1000);
    std::uniform_real_distribution<double> fi(-0.5, 6.5), fj(-0.5, 5.5);
    for (int k = 0; k < 200; ++k) {
      const double y = fi(rng), x = fj(rng);
      const auto [lat, lon] = cell_point(g, 0, 0, y, x);
      events.push_back({"user" + std::to_string(rng() % 5), time(rng), lat, lon, {}});
    }
    // Group by (user, slot), keep the in-bounds event with the largest
    // (timestamp, input position).
    std::map<std::pair<std::string, std::int64_t>, std::pair<std::pair<std::int64_t, std::size_t>, std::int32_t>> best;
    for (std::size_t k = 0; k < events.size(); ++k) {
      const auto& e = events[k];
      if (e.timestamp < g.start_time || e.timestamp >= g.end_time) continue;
      const auto r = assign_region(e, g);
      if (!r) continue;
      const auto key = std::make_pair(e.user_id, (e.timestamp - g.start_time) / g.slot_duration_s);
      const auto rank = std::make_pair(e.timestamp, k);
      auto it = best.find(key);
      if (it == best.end() || it->second.first < rank) best[key] = {rank, r->i * g.cols + r->j};
    }
    const auto p = build_presence(events, g);
    std::size_t present = 0;
    for (std::size_t u = 0; u < p.user_count(); ++u)
      for (std::size_t n = 0; n < p.slot_count(); ++n) {
        const auto it = best.find({p.users()[u], static_cast<std::int64_t>(n)});
        const std::int32_t want = it == best.end() ? PresenceTable::kAbsent : it->second.second;
        EXPECT_EQ(p.at(u, n), want);
        present += want != PresenceTable::kAbsent;
      }
    EXPECT_EQ(present, best.size());
  }
}

TEST(Ingest, RasterizeStationaryAndSingleMove) {
  auto g = small_grid();
  PresenceTable still({"a"}, g.slot_count());
  for (std::size_t n = 0; n < g.slot_count(); ++n) still.set(0, n, 7);
  const auto s = rasterize(still, g);
  for (std::size_t n = 0; n < g.slot_count(); ++n) {
    EXPECT_EQ(s.counts[s.index(n, 7, kStaying)], 1u);
    EXPECT_EQ(s.channel_total(n, kLeaving), 0u);
    EXPECT_EQ(s.channel_total(n, kArriving), 0u);
  }

  PresenceTable move({"a"}, 2);
  move.set(0, 0, 3);
  move.set(0, 1, 9);
  g.end_time = g.start_time + 2 * g.slot_duration_s;
  const auto m = rasterize(move, g);
  EXPECT_EQ(m.counts[m.index(1, 3, kLeaving)], 1u);
  EXPECT_EQ(m.counts[m.index(1, 9, kArriving)], 1u);
  EXPECT_EQ(m.channel_total(1, kStaying), 0u);
  EXPECT_EQ(m.channel_total(0, kStaying), 1u);
}

TEST(Ingest, RasterizeGapIsNotAnArrival) {
  auto g = small_grid();
  PresenceTable p({"a"}, g.slot_count());
  p.set(0, 2, 4);
  p.set(0, 5, 11);
  const auto s = rasterize(p, g);
  EXPECT_EQ(s.counts[s.index(5, 11, kStaying)], 1u);
  EXPECT_EQ(s.channel_total(5, kArriving), 0u);
}

TEST(Ingest, RasterizeIsPermutationInvariant) {
  const auto g = small_grid();
  std::mt19937_64 rng(3);
  PresenceTable a({"a", "b", "c", "d"}, g.slot_count()), b({"a", "b", "c", "d"}, g.slot_count());
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t n = 0; n < g.slot_count(); ++n) {
      const auto v = static_cast<std::int32_t>(rng() % 31) - 1;
      a.set(u, n, v);
      b.set(perm[u], n, v);
    }
  EXPECT_EQ(rasterize(a, g), rasterize(b, g));
}

TEST(Ingest, ImagesCsvRoundTrip) {
  const auto g = small_grid();
  std::mt19937_64 rng(11);
  PresenceTable p({"a", "b", "c"}, g.slot_count());
  for (std::size_t u = 0; u < 3; ++u)
    for (std::size_t n = 0; n < g.slot_count(); ++n) p.set(u, n, static_cast<std::int32_t>(rng() % 31) - 1);
  const auto images = rasterize(p, g);
  std::stringstream buf;
  write_images(buf, images);
  const std::string text = buf.str();
  EXPECT_EQ(text.rfind("slot,i,j,staying,leaving,arriving\n", 0), 0u);
  EXPECT_EQ(text.find(",0,0,0\n"), std::string::npos);
  EXPECT_EQ(read_images(buf, g), images);
}
