#include "urbanrhythm/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/io.hpp"

namespace urbanrhythm::report {

namespace {

constexpr std::array<const char*, 16> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#e7ba52", "#637939", "#ad494a", "#7b4173", "#3182bd"};

std::string num(double v) {
  // Two decimals are plenty for drawing and keep the files small.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", std::abs(v) < 0.005 ? 0.0 : v);
  return buf;
}

std::string header(double width, double height) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
      << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"#ffffff\"/>\n";
  return out.str();
}

std::size_t slots_per_day(std::int64_t slot_duration_s) {
  if (slot_duration_s <= 0 || 86400 % slot_duration_s != 0) {
    throw Error(ErrorKind::InvalidConfig, "report: slot duration must divide a day");
  }
  return static_cast<std::size_t>(86400 / slot_duration_s);
}

void check_series(const states::StateSeries& series) {
  if (series.labels.empty()) throw Error(ErrorKind::EmptyInput, "report: empty state series");
  if (series.slot_times.size() != series.labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "report: state series needs one timestamp per slot");
  }
}

std::string legend(const std::set<int>& states, double x, double y) {
  std::ostringstream out;
  double cx = x;
  for (int s : states) {
    out << "<rect class=\"legend\" x=\"" << num(cx) << "\" y=\"" << num(y) << "\" width=\"10\" height=\"10\" fill=\""
        << state_color(s) << "\"/>";
    out << "<text x=\"" << num(cx + 13) << "\" y=\"" << num(y + 9) << "\" font-size=\"10\">" << s << "</text>\n";
    cx += 36;
  }
  return out.str();
}

}  // namespace

std::string state_color(int state) {
  if (state < 0) return "#dddddd";
  if (state < static_cast<int>(kPalette.size())) return kPalette[static_cast<std::size_t>(state)];
  std::uint32_t h = 2166136261u;
  for (int k = 0; k < 4; ++k) {
    h ^= static_cast<std::uint32_t>(state >> (8 * k)) & 0xffu;
    h *= 16777619u;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%06x", h & 0xffffffu);
  return buf;
}

std::string render_strip(const states::StateSeries& series, const DayTypeCalendar& calendar,
                         std::int64_t slot_duration_s) {
  check_series(series);
  const std::size_t per_day = slots_per_day(slot_duration_s);
  std::vector<std::string> days;
  std::map<std::string, std::size_t> day_row;
  for (std::int64_t t : series.slot_times) {
    const auto date = calendar.date_of(t);
    if (day_row.emplace(date, days.size()).second) days.push_back(date);
  }
  constexpr double kCell = 12.0, kGutter = 130.0, kTop = 24.0;
  const double width = kGutter + kCell * static_cast<double>(per_day) + 10.0;
  const double height = kTop + kCell * static_cast<double>(days.size()) + 30.0;

  std::ostringstream out;
  out << header(width, height);
  for (std::size_t h = 0; h < per_day; h += per_day / 12 ? per_day / 12 : 1) {
    const double x = kGutter + kCell * static_cast<double>(h);
    out << "<text x=\"" << num(x) << "\" y=\"" << num(kTop - 6) << "\" font-size=\"9\">"
        << (static_cast<std::int64_t>(h) * slot_duration_s) / 3600 << "h</text>\n";
  }
  for (std::size_t r = 0; r < days.size(); ++r) {
    std::int64_t any = 0;
    for (std::size_t n = 0; n < series.slot_times.size(); ++n) {
      if (calendar.date_of(series.slot_times[n]) == days[r]) {
        any = series.slot_times[n];
        break;
      }
    }
    out << "<text class=\"day\" x=\"4\" y=\"" << num(kTop + kCell * static_cast<double>(r) + 10) << "\" font-size=\"10\">"
        << days[r] << ' ' << to_string(calendar.day_type(any)) << "</text>\n";
  }
  std::set<int> used;
  for (std::size_t n = 0; n < series.labels.size(); ++n) {
    const std::int64_t t = series.slot_times[n];
    const std::size_t row = day_row.at(calendar.date_of(t));
    const auto col = static_cast<std::size_t>(calendar.seconds_into_day(t) / slot_duration_s);
    used.insert(series.labels[n]);
    out << "<rect class=\"cell\" x=\"" << num(kGutter + kCell * static_cast<double>(col)) << "\" y=\""
        << num(kTop + kCell * static_cast<double>(row)) << "\" width=\"" << num(kCell) << "\" height=\"" << num(kCell)
        << "\" fill=\"" << state_color(series.labels[n]) << "\"/>\n";
  }
  out << legend(used, kGutter, kTop + kCell * static_cast<double>(days.size()) + 10);
  out << "</svg>\n";
  return out.str();
}

std::vector<Ring> ring_data(const states::StateSeries& series, const DayTypeCalendar& calendar,
                            std::span<const DayType> groups, std::int64_t slot_duration_s) {
  check_series(series);
  if (groups.empty()) throw Error(ErrorKind::EmptyInput, "report: no ring groups requested");
  const std::size_t per_day = slots_per_day(slot_duration_s);
  std::vector<Ring> rings;
  for (DayType g : groups) {
    Ring ring;
    ring.group = g;
    std::vector<std::map<int, std::size_t>> votes(per_day);
    std::set<std::string> days;
    for (std::size_t n = 0; n < series.labels.size(); ++n) {
      const std::int64_t t = series.slot_times[n];
      if (calendar.day_type(t) != g) continue;
      days.insert(calendar.date_of(t));
      votes[static_cast<std::size_t>(calendar.seconds_into_day(t) / slot_duration_s)][series.labels[n]]++;
    }
    ring.days = days.size();
    ring.modal.assign(per_day, -1);
    for (std::size_t s = 0; s < per_day; ++s) {
      std::size_t best = 0;
      for (const auto& [state, count] : votes[s]) {
        if (count > best) {
          best = count;
          ring.modal[s] = state;
        }
      }
    }
    rings.push_back(std::move(ring));
  }
  return rings;
}

std::string render_rings(const states::StateSeries& series, const DayTypeCalendar& calendar,
                         std::span<const DayType> groups, std::int64_t slot_duration_s) {
  const auto rings = ring_data(series, calendar, groups, slot_duration_s);
  constexpr double kInner = 40.0, kWidth = 36.0;
  const double outer = kInner + kWidth * static_cast<double>(rings.size());
  const double size = 2 * outer + 40.0;
  const double c = size / 2;
  std::ostringstream out;
  out << header(size, size + 40.0);
  std::set<int> used;
  for (std::size_t r = 0; r < rings.size(); ++r) {
    const double r0 = kInner + kWidth * static_cast<double>(r);
    const double r1 = r0 + kWidth - 2.0;
    const std::size_t sectors = rings[r].modal.size();
    const double step = 2.0 * std::numbers::pi / static_cast<double>(sectors);
    for (std::size_t s = 0; s < sectors; ++s) {
      // Midnight at the top, clockwise.
      const double a0 = -std::numbers::pi / 2 + step * static_cast<double>(s);
      const double a1 = a0 + step;
      const int state = rings[r].modal[s];
      if (state >= 0) used.insert(state);
      out << "<path class=\"sector\" data-ring=\"" << r << "\" data-slot=\"" << s << "\" d=\"M " << num(c + r0 * std::cos(a0))
          << ' ' << num(c + r0 * std::sin(a0)) << " L " << num(c + r1 * std::cos(a0)) << ' '
          << num(c + r1 * std::sin(a0)) << " A " << num(r1) << ' ' << num(r1) << " 0 0 1 " << num(c + r1 * std::cos(a1))
          << ' ' << num(c + r1 * std::sin(a1)) << " L " << num(c + r0 * std::cos(a1)) << ' '
          << num(c + r0 * std::sin(a1)) << " A " << num(r0) << ' ' << num(r0) << " 0 0 0 "
          << num(c + r0 * std::cos(a0)) << ' ' << num(c + r0 * std::sin(a0)) << " Z\" fill=\"" << state_color(state)
          << "\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
    }
    out << "<text class=\"ring-label\" x=\"" << num(c + 2) << "\" y=\"" << num(c - r0 - kWidth / 2 + 4)
        << "\" font-size=\"9\">" << to_string(rings[r].group) << " (" << rings[r].days << ")</text>\n";
  }
  out << legend(used, 10, size + 10);
  out << "</svg>\n";
  return out.str();
}

std::string render_scatter(const linalg::DenseMatrix& features2d, std::span<const int> labels) {
  if (features2d.rows() == 0) throw Error(ErrorKind::EmptyInput, "report: no points to plot");
  if (features2d.cols() != 2) throw Error(ErrorKind::DimensionMismatch, "report: scatter needs two columns");
  if (labels.size() != features2d.rows()) throw Error(ErrorKind::LengthMismatch, "report: one label per point");
  if (!features2d.all_finite()) throw Error(ErrorKind::NonFiniteInput, "report: non-finite coordinates");
  double lo_x = features2d(0, 0), hi_x = lo_x, lo_y = features2d(0, 1), hi_y = lo_y;
  for (std::size_t n = 0; n < features2d.rows(); ++n) {
    lo_x = std::min(lo_x, features2d(n, 0));
    hi_x = std::max(hi_x, features2d(n, 0));
    lo_y = std::min(lo_y, features2d(n, 1));
    hi_y = std::max(hi_y, features2d(n, 1));
  }
  constexpr double kPlot = 480.0, kMargin = 20.0;
  const double sx = hi_x > lo_x ? kPlot / (hi_x - lo_x) : 0.0;
  const double sy = hi_y > lo_y ? kPlot / (hi_y - lo_y) : 0.0;
  std::ostringstream out;
  out << header(kPlot + 2 * kMargin, kPlot + 2 * kMargin + 30.0);
  std::set<int> used(labels.begin(), labels.end());
  for (std::size_t n = 0; n < features2d.rows(); ++n) {
    const double x = kMargin + (sx > 0 ? (features2d(n, 0) - lo_x) * sx : kPlot / 2);
    const double y = kMargin + kPlot - (sy > 0 ? (features2d(n, 1) - lo_y) * sy : kPlot / 2);
    out << "<circle class=\"point\" cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"2.5\" fill=\""
        << state_color(labels[n]) << "\" fill-opacity=\"0.8\"/>\n";
  }
  out << legend(used, kMargin, kPlot + 2 * kMargin + 10);
  out << "</svg>\n";
  return out.str();
}

}  // namespace urbanrhythm::report
