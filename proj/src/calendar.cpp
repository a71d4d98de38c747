#include "urbanrhythm/calendar.hpp"

#include <chrono>
#include <cstdio>

#include "urbanrhythm/error.hpp"

namespace urbanrhythm {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

constexpr std::int64_t kSecondsPerDay = 86400;

}  // namespace

std::string_view to_string(DayType type) {
  switch (type) {
    case DayType::Weekday: return "weekday";
    case DayType::Weekend: return "weekend";
    case DayType::Holiday: return "holiday";
  }
  return "weekday";
}

DayType day_type_from_string(std::string_view text) {
  if (text == "weekday") return DayType::Weekday;
  if (text == "weekend") return DayType::Weekend;
  if (text == "holiday") return DayType::Holiday;
  throw Error(ErrorKind::InvalidConfig, "unknown day type '" + std::string(text) + "'");
}

std::string DayTypeCalendar::date_of(std::int64_t timestamp) const {
  using namespace std::chrono;
  const auto days = floor_div(timestamp + utc_offset_s_, kSecondsPerDay);
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buffer;
}

int DayTypeCalendar::weekday_of(std::int64_t timestamp) const {
  using namespace std::chrono;
  const auto days = floor_div(timestamp + utc_offset_s_, kSecondsPerDay);
  return static_cast<int>(weekday{sys_days{std::chrono::days{days}}}.c_encoding());
}

DayType DayTypeCalendar::day_type(std::int64_t timestamp) const {
  if (holidays_.count(date_of(timestamp)) != 0) return DayType::Holiday;
  const int wd = weekday_of(timestamp);
  return (wd == 0 || wd == 6) ? DayType::Weekend : DayType::Weekday;
}

std::int64_t DayTypeCalendar::seconds_into_day(std::int64_t timestamp) const {
  const std::int64_t local = timestamp + utc_offset_s_;
  return local - floor_div(local, kSecondsPerDay) * kSecondsPerDay;
}

}  // namespace urbanrhythm
