#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "urbanrhythm/calendar.hpp"
#include "urbanrhythm/linalg.hpp"
#include "urbanrhythm/states.hpp"

namespace urbanrhythm::report {

// Fixed colours for ids 0..15, a hashed colour beyond that. Negative ids
// (no data) are grey.
std::string state_color(int state);

// One row per calendar day, one <rect class="cell"> per slot.
std::string render_strip(const states::StateSeries& series, const DayTypeCalendar& calendar,
                         std::int64_t slot_duration_s = 1800);

struct Ring {
  DayType group = DayType::Weekday;
  std::size_t days = 0;
  std::vector<int> modal;  // per slot of day; -1 when the group has no data there
};

// Modal state per slot of day over all days of each group; ties go to the
// smallest state id.
std::vector<Ring> ring_data(const states::StateSeries& series, const DayTypeCalendar& calendar,
                            std::span<const DayType> groups, std::int64_t slot_duration_s = 1800);

// Rings are drawn from the inside out in the order given; each sector is a
// <path class="sector">.
std::string render_rings(const states::StateSeries& series, const DayTypeCalendar& calendar,
                         std::span<const DayType> groups, std::int64_t slot_duration_s = 1800);

// features2d is N x 2; one <circle class="point"> per row.
std::string render_scatter(const linalg::DenseMatrix& features2d, std::span<const int> labels);

}  // namespace urbanrhythm::report
