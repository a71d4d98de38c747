#include "urbanrhythm/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <tuple>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/io.hpp"
#include "urbanrhythm/parallel.hpp"

namespace urbanrhythm::synth {

namespace {

struct Cell {
  int i = 0;
  int j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Deterministic per-agent stream; mt19937_64 output is fixed by the standard,
// and the conversions below avoid implementation-defined distributions.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t agent) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(agent), static_cast<std::uint32_t>(agent >> 32), 0x5eedu};
    engine_.seed(seq);
  }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 engine_;
};

Cell pick_cell(Stream& rng, const std::vector<Zone>& zones) {
  std::size_t total = 0;
  for (const auto& z : zones) total += static_cast<std::size_t>((z.row_end - z.row_begin) * (z.col_end - z.col_begin));
  std::size_t k = rng.index(total);
  for (const auto& z : zones) {
    const std::size_t area = static_cast<std::size_t>((z.row_end - z.row_begin) * (z.col_end - z.col_begin));
    if (k < area) {
      const int width = z.col_end - z.col_begin;
      return {z.row_begin + static_cast<int>(k) / width, z.col_begin + static_cast<int>(k) % width};
    }
    k -= area;
  }
  return {zones.front().row_begin, zones.front().col_begin};
}

std::vector<Cell> line(Cell from, Cell to) {
  std::vector<Cell> cells;
  int di = std::abs(to.i - from.i), dj = -std::abs(to.j - from.j);
  const int si = from.i < to.i ? 1 : -1, sj = from.j < to.j ? 1 : -1;
  int err = di + dj;
  Cell c = from;
  while (true) {
    cells.push_back(c);
    if (c == to) break;
    const int e2 = 2 * err;
    if (e2 >= dj) {
      err += dj;
      c.i += si;
    }
    if (e2 <= di) {
      err += di;
      c.j += sj;
    }
  }
  return cells;
}

// Relative app-category weights per behaviour, and how active users are.
struct UsageProfile {
  double activity;
  std::array<double, 10> weights;  // order of app_categories()
};

const UsageProfile& usage_profile(Behavior b) {
  //                                   Soc  Vid  Mus  Rea  Gam  Shp  Res  Tra  Off  Stk
  static const UsageProfile kSleep{0.1, {2, 3, 1, 1, 2, 1, 0.5, 0.5, 0.5, 0.2}};
  static const UsageProfile kCommute{1.0, {3, 2, 5, 4, 3, 1, 1, 5, 1, 0.5}};
  static const UsageProfile kWork{0.8, {2, 1, 1, 1, 1, 3, 1, 0.5, 6, 4}};
  static const UsageProfile kRelax{1.0, {4, 4, 2, 1, 2, 3, 6, 3, 0.5, 0.3}};
  static const UsageProfile kHome{0.6, {3, 6, 2, 2, 5, 2, 1, 0.5, 0.5, 0.2}};
  switch (b) {
    case Behavior::Sleep: return kSleep;
    case Behavior::Commute: return kCommute;
    case Behavior::Work: return kWork;
    case Behavior::Relax: return kRelax;
    case Behavior::Home: return kHome;
  }
  return kSleep;
}

std::size_t pick_category(Stream& rng, Behavior b) {
  const auto& w = usage_profile(b).weights;
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (u < w[k]) return k;
    u -= w[k];
  }
  return w.size() - 1;
}

bool inside(const ingest::GridSpec& g, const Zone& z) {
  return z.row_begin >= 0 && z.col_begin >= 0 && z.row_end <= g.rows && z.col_end <= g.cols &&
         z.row_begin < z.row_end && z.col_begin < z.col_end;
}

std::string user_name(std::size_t agent, std::size_t agents) {
  std::string digits = std::to_string(agent);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(agents).size());
  return "u" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

std::string_view to_string(Behavior behavior) {
  switch (behavior) {
    case Behavior::Sleep: return "sleep";
    case Behavior::Commute: return "commute";
    case Behavior::Work: return "work";
    case Behavior::Relax: return "relax";
    case Behavior::Home: return "home";
  }
  return "sleep";
}

Behavior behavior_from_string(std::string_view text) {
  for (std::size_t b = 0; b < kBehaviorCount; ++b) {
    if (to_string(static_cast<Behavior>(b)) == text) return static_cast<Behavior>(b);
  }
  throw Error(ErrorKind::InvalidConfig, "unknown behaviour '" + std::string(text) + "'");
}

const std::vector<std::string>& app_categories() {
  static const std::vector<std::string> kCategories{"Social",   "Video",      "Music",          "Reading", "Game",
                                                    "Shopping", "Restaurant", "Transportation", "Office",  "Stock"};
  return kCategories;
}

SynthConfig SynthConfig::defaults() {
  SynthConfig c;
  c.grid.origin_lat = 39.80;
  c.grid.origin_lon = 116.20;
  c.grid.cell_size_m = 1000.0;
  c.grid.rows = 20;
  c.grid.cols = 16;
  c.grid.slot_duration_s = 1800;
  c.grid.start_time = 1554076800;  // 2019-04-01 00:00 UTC, a Monday
  c.grid.end_time = c.grid.start_time + static_cast<std::int64_t>(c.days) * 86400;
  c.calendar = DayTypeCalendar({"2019-04-05", "2019-04-06", "2019-04-07"});
  using B = Behavior;
  c.schedule[DayType::Weekday] = {{0, 14, B::Sleep},   {14, 18, B::Commute}, {18, 36, B::Work},
                                  {36, 38, B::Commute}, {38, 42, B::Relax},   {42, 44, B::Commute},
                                  {44, 48, B::Home}};
  c.schedule[DayType::Weekend] = {{0, 18, B::Sleep},  {18, 24, B::Home},    {24, 26, B::Commute},
                                  {26, 40, B::Relax}, {40, 42, B::Commute}, {42, 48, B::Home}};
  c.schedule[DayType::Holiday] = {{0, 20, B::Sleep},  {20, 22, B::Commute}, {22, 44, B::Relax},
                                  {44, 46, B::Commute}, {46, 48, B::Home}};
  c.home_zones = {{2, 18, 0, 4}};
  c.work_zones = {{6, 14, 11, 16}};
  c.leisure_zones = {{0, 4, 6, 10}, {16, 20, 6, 10}};
  return c;
}

std::size_t SynthConfig::slots_per_day() const {
  return static_cast<std::size_t>(86400 / grid.slot_duration_s);
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidConfig, "synth: " + m); };
  grid.validate();
  if (agents == 0 || days == 0) fail("agents and days must be positive");
  if (86400 % grid.slot_duration_s != 0) fail("slot duration must divide a day");
  if (calendar.seconds_into_day(grid.start_time) != 0) fail("start_time must be a local midnight");
  if (grid.end_time != grid.start_time + static_cast<std::int64_t>(days) * 86400) fail("end_time must equal start + days");
  if (!(observation_rate >= 0.0 && observation_rate <= 1.0)) fail("observation rate must lie in [0, 1]");
  for (double p : {home_wander, relax_move, usage_rate}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
  }
  if (leisure_venues == 0) fail("leisure_venues must be positive");
  for (const auto* zones : {&home_zones, &work_zones, &leisure_zones}) {
    if (zones->empty()) fail("home, work and leisure zones are required");
    for (const auto& z : *zones) {
      if (!inside(grid, z)) fail("zone lies outside the grid");
    }
  }
  const std::size_t per_day = slots_per_day();
  for (DayType t : {DayType::Weekday, DayType::Weekend, DayType::Holiday}) {
    const auto it = schedule.find(t);
    if (it == schedule.end() || it->second.empty()) fail("missing schedule for " + std::string(to_string(t)));
    std::size_t expect = 0;
    for (const auto& b : it->second) {
      if (b.begin != expect || b.end <= b.begin) fail("schedule blocks must partition the day in order");
      expect = b.end;
    }
    if (expect != per_day) fail("schedule must cover all " + std::to_string(per_day) + " slots");
  }
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  const auto& grid = config.grid;
  const std::size_t n_slots = grid.slot_count();
  const std::size_t per_day = config.slots_per_day();

  SynthOutput out;
  auto& truth = out.truth;
  truth.agents = config.agents;
  truth.regimes.resize(n_slots);
  for (std::size_t n = 0; n < n_slots; ++n) {
    const std::int64_t ts = grid.slot_start(n);
    const auto& blocks = config.schedule.at(config.calendar.day_type(ts));
    const std::size_t sod = n % per_day;
    for (const auto& b : blocks) {
      if (sod >= b.begin && sod < b.end) truth.regimes[n] = b.behavior;
    }
  }
  truth.regions.assign(config.agents * n_slots, 0);

  std::vector<std::vector<ingest::MobilityEvent>> agent_events(config.agents);
  std::vector<std::vector<UsageEvent>> agent_usage(config.agents);
  const auto& categories = app_categories();

  parallel_for(0, config.agents, [&](std::size_t agent) {
    Stream rng(config.seed, agent);
    const std::string user = user_name(agent, config.agents);
    const Cell home = pick_cell(rng, config.home_zones);
    const Cell work = pick_cell(rng, config.work_zones);
    std::vector<Cell> venues;
    for (std::size_t v = 0; v < config.leisure_venues; ++v) venues.push_back(pick_cell(rng, config.leisure_zones));

    Cell pos = home;
    Cell relax_entry = venues.front();
    std::vector<Cell> path;
    std::size_t commute_begin = 0, commute_len = 0;
    for (std::size_t n = 0; n < n_slots; ++n) {
      const Behavior b = truth.regimes[n];
      const Behavior prev = n == 0 ? Behavior::Sleep : truth.regimes[n - 1];
      switch (b) {
        case Behavior::Sleep:
          pos = home;
          break;
        case Behavior::Home:
          pos = home;
          if (rng.chance(config.home_wander)) {
            static constexpr int kDi[] = {-1, 1, 0, 0};
            static constexpr int kDj[] = {0, 0, -1, 1};
            const std::size_t k = rng.index(4);
            const Cell next{home.i + kDi[k], home.j + kDj[k]};
            if (next.i >= 0 && next.i < grid.rows && next.j >= 0 && next.j < grid.cols) pos = next;
          }
          break;
        case Behavior::Work:
          pos = work;
          break;
        case Behavior::Relax:
          if (prev != Behavior::Relax) {
            pos = prev == Behavior::Commute ? relax_entry : venues[rng.index(venues.size())];
          } else if (rng.chance(config.relax_move)) {
            pos = venues[rng.index(venues.size())];
          }
          break;
        case Behavior::Commute: {
          if (n == 0 || prev != Behavior::Commute) {
            commute_begin = n;
            commute_len = 0;
            while (n + commute_len < n_slots && truth.regimes[n + commute_len] == Behavior::Commute) ++commute_len;
            const std::size_t after = n + commute_len;
            const Behavior next = after < n_slots ? truth.regimes[after] : Behavior::Sleep;
            Cell dest = home;
            if (next == Behavior::Work) dest = work;
            if (next == Behavior::Relax) {
              relax_entry = venues[rng.index(venues.size())];
              dest = relax_entry;
            }
            path = line(pos, dest);
          }
          const std::size_t step = n - commute_begin + 1;
          const double frac = static_cast<double>(step) / static_cast<double>(commute_len);
          const auto idx = static_cast<std::size_t>(std::lround(frac * static_cast<double>(path.size() - 1)));
          pos = path[std::min(idx, path.size() - 1)];
          break;
        }
      }
      truth.regions[agent * n_slots + n] = pos.i * grid.cols + pos.j;

      const std::int64_t slot_start = grid.slot_start(n);
      if (rng.chance(config.observation_rate)) {
        const auto offset = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(grid.slot_duration_s));
        const double fi = 0.05 + 0.9 * rng.uniform();
        const double fj = 0.05 + 0.9 * rng.uniform();
        const auto [lat, lon] = ingest::cell_point(grid, pos.i, pos.j, fi, fj);
        agent_events[agent].push_back({user, slot_start + std::min(offset, grid.slot_duration_s - 1), lat, lon, {}});
      }
      if (rng.chance(config.usage_rate * usage_profile(b).activity)) {
        const auto offset = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(grid.slot_duration_s));
        agent_usage[agent].push_back(
            {user, slot_start + std::min(offset, grid.slot_duration_s - 1), categories[pick_category(rng, b)]});
      }
    }
  });

  for (auto& list : agent_events) {
    for (auto& e : list) out.events.push_back(std::move(e));
  }
  for (auto& list : agent_usage) {
    for (auto& u : list) out.usage.push_back(std::move(u));
  }
  std::stable_sort(out.events.begin(), out.events.end(), [](const auto& a, const auto& b) {
    return std::tie(a.timestamp, a.user_id) < std::tie(b.timestamp, b.user_id);
  });
  std::stable_sort(out.usage.begin(), out.usage.end(), [](const auto& a, const auto& b) {
    return std::tie(a.timestamp, a.user_id) < std::tie(b.timestamp, b.user_id);
  });

  double commute_moves = 0.0, sleep_moves = 0.0;
  std::size_t commute_slots = 0, sleep_slots = 0;
  for (std::size_t n = 1; n < n_slots; ++n) {
    const Behavior b = truth.regimes[n];
    if (b != Behavior::Commute && b != Behavior::Sleep) continue;
    std::size_t moves = 0;
    for (std::size_t a = 0; a < config.agents; ++a) moves += truth.region(a, n) != truth.region(a, n - 1) ? 1 : 0;
    if (b == Behavior::Commute) {
      commute_moves += 2.0 * static_cast<double>(moves);
      ++commute_slots;
    } else {
      sleep_moves += 2.0 * static_cast<double>(moves);
      ++sleep_slots;
    }
  }
  const double commute_mean = commute_slots ? commute_moves / static_cast<double>(commute_slots) : 0.0;
  const double sleep_mean = sleep_slots ? sleep_moves / static_cast<double>(sleep_slots) : 0.0;
  truth.separability = sleep_mean > 0.0 ? commute_mean / sleep_mean
                                        : (commute_mean > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return out;
}

void write_truth(std::ostream& out, const GroundTruth& truth) {
  out << "slot,regime\n";
  for (std::size_t n = 0; n < truth.regimes.size(); ++n) out << n << ',' << to_string(truth.regimes[n]) << '\n';
}

std::vector<Behavior> read_truth(std::istream& in) {
  std::vector<Behavior> regimes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty() || line_no == 1) continue;
    const auto fields = io::split(text, ',');
    if (fields.size() != 2) throw Error(ErrorKind::MalformedInput, "truth line " + std::to_string(line_no) + " is malformed");
    regimes.push_back(behavior_from_string(io::trim(fields[1])));
  }
  return regimes;
}

void write_usage(std::ostream& out, const std::vector<UsageEvent>& usage) {
  out << "user_id,timestamp,app_category\n";
  for (const auto& u : usage) out << u.user_id << ',' << u.timestamp << ',' << u.app_category << '\n';
}

std::vector<UsageEvent> read_usage(std::istream& in) {
  std::vector<UsageEvent> usage;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty() || line_no == 1) continue;
    const auto fields = io::split(text, ',');
    UsageEvent u;
    if (fields.size() != 3 || !io::parse_int64(fields[1], u.timestamp)) {
      throw Error(ErrorKind::MalformedInput, "usage line " + std::to_string(line_no) + " is malformed");
    }
    u.user_id = std::string(io::trim(fields[0]));
    u.app_category = std::string(io::trim(fields[2]));
    usage.push_back(std::move(u));
  }
  return usage;
}

}  // namespace urbanrhythm::synth
