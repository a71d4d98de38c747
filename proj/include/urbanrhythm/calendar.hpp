#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

namespace urbanrhythm {

enum class DayType { Weekday = 0, Weekend = 1, Holiday = 2 };

std::string_view to_string(DayType type);
DayType day_type_from_string(std::string_view text);

// Weekday/weekend/holiday classification of calendar dates. Holidays are
// supplied by the user as ISO dates; weekends default to Saturday and Sunday.
class DayTypeCalendar {
 public:
  DayTypeCalendar() = default;
  explicit DayTypeCalendar(std::set<std::string> holidays,
                           std::int64_t utc_offset_s = 0)
      : holidays_(std::move(holidays)), utc_offset_s_(utc_offset_s) {}

  // ISO date (YYYY-MM-DD) of an epoch timestamp in local time.
  std::string date_of(std::int64_t timestamp) const;
  // 0 = Sunday ... 6 = Saturday.
  int weekday_of(std::int64_t timestamp) const;
  DayType day_type(std::int64_t timestamp) const;
  // Seconds elapsed since local midnight.
  std::int64_t seconds_into_day(std::int64_t timestamp) const;

  const std::set<std::string>& holidays() const { return holidays_; }
  std::int64_t utc_offset_s() const { return utc_offset_s_; }

 private:
  std::set<std::string> holidays_;
  std::int64_t utc_offset_s_ = 0;
};

}  // namespace urbanrhythm
