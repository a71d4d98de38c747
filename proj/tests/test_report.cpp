#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/report.hpp"

using namespace urbanrhythm;
using namespace urbanrhythm::report;

namespace {

constexpr std::int64_t kStart = 1554076800;  // 2019-04-01, a Monday

states::StateSeries series(std::size_t days, std::uint64_t seed, std::size_t k = 5) {
  std::mt19937_64 rng(seed);
  states::StateSeries s;
  s.k = k;
  for (std::size_t n = 0; n < days * 48; ++n) {
    s.labels.push_back(static_cast<int>(rng() % k));
    s.slot_times.push_back(kStart + static_cast<std::int64_t>(n) * 1800);
  }
  return s;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t hits = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++hits;
  return hits;
}

bool well_formed(const std::string& svg) {
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
  return tree.count("svg") == 1;
}

std::vector<std::string> fills(const std::string& svg, const std::string& cls) {
  const std::regex re("class=\"" + cls + "\"[^>]*fill=\"(#[0-9a-f]{6})\"");
  std::vector<std::string> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) out.push_back((*it)[1]);
  return out;
}

}  // namespace

TEST(Palette, DistinctForSixteenStates) {
  std::set<std::string> seen;
  for (int k = 0; k < 16; ++k) seen.insert(state_color(k));
  EXPECT_EQ(seen.size(), 16u);
  EXPECT_EQ(state_color(-1), "#dddddd");
  EXPECT_EQ(state_color(40), state_color(40));
  EXPECT_TRUE(std::regex_match(state_color(40), std::regex("#[0-9a-f]{6}")));
}

TEST(Strip, OneCellPerSlot) {
  const auto s = series(3, 1);
  const auto svg = render_strip(s, DayTypeCalendar{});
  EXPECT_EQ(count(svg, "class=\"cell\""), s.labels.size());
  EXPECT_EQ(count(svg, "class=\"day\""), 3u);
  EXPECT_TRUE(well_formed(svg));
}

TEST(Strip, SingleStateDayIsUniform) {
  states::StateSeries s;
  s.k = 1;
  for (std::size_t n = 0; n < 48; ++n) {
    s.labels.push_back(0);
    s.slot_times.push_back(kStart + static_cast<std::int64_t>(n) * 1800);
  }
  const auto cells = fills(render_strip(s, DayTypeCalendar{}), "cell");
  ASSERT_EQ(cells.size(), 48u);
  EXPECT_EQ(std::set<std::string>(cells.begin(), cells.end()), std::set<std::string>{state_color(0)});
}

TEST(Strip, ThirtyDaysThirtyRows) {
  const auto svg = render_strip(series(30, 2), DayTypeCalendar{{"2019-04-05"}});
  EXPECT_EQ(count(svg, "class=\"day\""), 30u);
  EXPECT_EQ(count(svg, "2019-04-05 holiday"), 1u);
  EXPECT_EQ(count(svg, "2019-04-06 weekend"), 1u);
  EXPECT_EQ(count(svg, "2019-04-01 weekday"), 1u);
  EXPECT_TRUE(well_formed(svg));
}

TEST(Strip, RejectsBadInput) {
  states::StateSeries empty;
  EXPECT_THROW(render_strip(empty, DayTypeCalendar{}), Error);
  auto s = series(1, 3);
  s.slot_times.pop_back();
  EXPECT_THROW(render_strip(s, DayTypeCalendar{}), Error);
}

TEST(Rings, ModalStatePerSlot) {
  // three weekdays: slot n has labels {a, a, b}, so the modal is a
  states::StateSeries s;
  s.k = 3;
  for (std::size_t d = 0; d < 3; ++d)
    for (std::size_t n = 0; n < 48; ++n) {
      s.labels.push_back(d < 2 ? static_cast<int>(n % 3) : 2 - static_cast<int>(n % 3));
      s.slot_times.push_back(kStart + static_cast<std::int64_t>(d * 48 + n) * 1800);
    }
  const std::vector<DayType> groups{DayType::Weekday, DayType::Weekend};
  const auto rings = ring_data(s, DayTypeCalendar{}, groups);
  ASSERT_EQ(rings.size(), 2u);
  EXPECT_EQ(rings[0].days, 3u);
  EXPECT_EQ(rings[1].days, 0u);
  for (std::size_t n = 0; n < 48; ++n) {
    EXPECT_EQ(rings[0].modal[n], static_cast<int>(n % 3));
    EXPECT_EQ(rings[1].modal[n], -1);
  }
}

TEST(Rings, TiesGoToSmallestState) {
  states::StateSeries s;
  s.k = 2;
  for (std::size_t d = 0; d < 2; ++d)
    for (std::size_t n = 0; n < 48; ++n) {
      s.labels.push_back(d == 0 ? 1 : 0);
      s.slot_times.push_back(kStart + static_cast<std::int64_t>(d * 48 + n) * 1800);
    }
  const std::vector<DayType> groups{DayType::Weekday};
  const auto rings = ring_data(s, DayTypeCalendar{}, groups);
  for (int m : rings[0].modal) EXPECT_EQ(m, 0);
}

TEST(Rings, SingleDayRingEqualsLabels) {
  const auto s = series(1, 4);
  const std::vector<DayType> groups{DayType::Weekday};
  const auto ring = ring_data(s, DayTypeCalendar{}, groups)[0];
  EXPECT_EQ(ring.modal, s.labels);
  const auto svg = render_rings(s, DayTypeCalendar{}, groups);
  std::vector<std::string> expect;
  for (int l : s.labels) expect.push_back(state_color(l));
  EXPECT_EQ(fills(svg, "sector"), expect);
}

TEST(Rings, SectorCounts) {
  const auto s = series(14, 5);
  const std::vector<DayType> two{DayType::Weekday, DayType::Weekend};
  const auto svg = render_rings(s, DayTypeCalendar{}, two);
  EXPECT_EQ(count(svg, "class=\"sector\""), 96u);
  EXPECT_EQ(count(svg, "data-ring=\"1\""), 48u);
  EXPECT_TRUE(well_formed(svg));
}

TEST(Scatter, OnePointPerRow) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  linalg::DenseMatrix xy(40, 2);
  for (auto& v : xy.values()) v = g(rng);
  std::vector<int> labels(40);
  for (std::size_t n = 0; n < 40; ++n) labels[n] = static_cast<int>(n % 4);
  const auto svg = render_scatter(xy, labels);
  EXPECT_EQ(count(svg, "class=\"point\""), 40u);
  EXPECT_TRUE(well_formed(svg));
}

TEST(Scatter, IdenticalRowsCoincide) {
  linalg::DenseMatrix xy(5, 2, 1.25);
  const std::vector<int> labels{0, 1, 0, 1, 2};
  const auto svg = render_scatter(xy, labels);
  const std::regex re("class=\"point\" cx=\"([^\"]+)\" cy=\"([^\"]+)\"");
  std::set<std::string> positions;
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it)
    positions.insert((*it)[1].str() + "," + (*it)[2].str());
  EXPECT_EQ(positions.size(), 1u);
}

TEST(Scatter, RejectsBadInput) {
  linalg::DenseMatrix xy(3, 3);
  const std::vector<int> labels{0, 0, 0};
  EXPECT_THROW(render_scatter(xy, labels), Error);
  linalg::DenseMatrix two(3, 2);
  const std::vector<int> short_labels{0, 0};
  EXPECT_THROW(render_scatter(two, short_labels), Error);
}
