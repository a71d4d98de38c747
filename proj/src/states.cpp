#include "urbanrhythm/states.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/io.hpp"
#include "urbanrhythm/parallel.hpp"

namespace urbanrhythm::states {

namespace {

std::vector<int> canonical(std::span<const std::size_t> raw) {
  std::vector<int> labels(raw.size());
  std::vector<std::pair<std::size_t, int>> seen;
  for (std::size_t n = 0; n < raw.size(); ++n) {
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == raw[n]; });
    if (it == seen.end()) {
      seen.emplace_back(raw[n], static_cast<int>(seen.size()));
      labels[n] = seen.back().second;
    } else {
      labels[n] = it->second;
    }
  }
  return labels;
}

// Label of the root each leaf belongs to after applying the first
// (N - k) merges.
std::vector<std::size_t> component_roots(const Dendrogram& d, std::size_t k) {
  const std::size_t n = d.leaves;
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  const std::size_t applied = n - k;
  for (std::size_t m = 0; m < applied; ++m) {
    parent[d.merges[m].left] = n + m;
    parent[d.merges[m].right] = n + m;
  }
  std::vector<std::size_t> roots(n);
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    std::size_t node = leaf;
    while (parent[node] != node) node = parent[node];
    roots[leaf] = node;
  }
  return roots;
}

void require_k(const Dendrogram& d, std::size_t k) {
  if (k < 1 || k > d.leaves) {
    throw Error(ErrorKind::BadK, "K must lie in [1, " + std::to_string(d.leaves) + "], got " + std::to_string(k));
  }
}

}  // namespace

Dendrogram ward_cluster(const linalg::DenseMatrix& features) {
  const std::size_t n = features.rows();
  if (n < 2) throw Error(ErrorKind::DegenerateInput, "Ward clustering needs at least 2 points");
  if (!features.all_finite()) throw Error(ErrorKind::NonFiniteInput, "features contain NaN or Inf");

  // Slot s holds the active cluster originally seeded by leaf s.
  std::vector<double> dist(n * n, 0.0);
  parallel_for(0, n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      const auto a = features.row(i);
      const auto b = features.row(j);
      for (std::size_t c = 0; c < features.cols(); ++c) {
        const double diff = a[c] - b[c];
        acc += diff * diff;
      }
      dist[i * n + j] = 0.5 * acc;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[j * n + i] = dist[i * n + j];
  }

  std::vector<std::size_t> node(n);
  std::iota(node.begin(), node.end(), 0);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);

  Dendrogram out;
  out.leaves = n;
  out.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0, best_b = 0;
    std::pair<std::size_t, std::size_t> best_ids{std::numeric_limits<std::size_t>::max(), 0};
    for (std::size_t x = 0; x < active.size(); ++x) {
      const std::size_t a = active[x];
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const std::size_t b = active[y];
        const double c = dist[a * n + b];
        if (c > best) continue;
        const std::pair<std::size_t, std::size_t> ids{std::min(node[a], node[b]), std::max(node[a], node[b])};
        if (c < best || ids < best_ids) {
          best = c;
          best_a = a;
          best_b = b;
          best_ids = ids;
        }
      }
    }

    const std::size_t na = size[best_a];
    const std::size_t nb = size[best_b];
    out.merges.push_back({best_ids.first, best_ids.second, best, na + nb});

    // Lance-Williams update into slot best_a; best_b retires.
    const double dab = dist[best_a * n + best_b];
    for (std::size_t other : active) {
      if (other == best_a || other == best_b) continue;
      const double nk = static_cast<double>(size[other]);
      const double updated = ((static_cast<double>(na) + nk) * dist[other * n + best_a] +
                              (static_cast<double>(nb) + nk) * dist[other * n + best_b] - nk * dab) /
                             (static_cast<double>(na + nb) + nk);
      dist[other * n + best_a] = updated;
      dist[best_a * n + other] = updated;
    }
    size[best_a] = na + nb;
    node[best_a] = n + step;
    active.erase(std::find(active.begin(), active.end(), best_b));
  }
  return out;
}

StateSeries cut(const Dendrogram& dendrogram, std::size_t k, std::span<const std::int64_t> slot_times) {
  require_k(dendrogram, k);
  if (!slot_times.empty() && slot_times.size() != dendrogram.leaves) {
    throw Error(ErrorKind::LengthMismatch, "slot_times length does not match the dendrogram");
  }
  StateSeries series;
  series.k = k;
  series.labels = canonical(component_roots(dendrogram, k));
  series.slot_times.assign(slot_times.begin(), slot_times.end());
  return series;
}

nlohmann::json hierarchy_export(const Dendrogram& dendrogram, std::span<const std::size_t> levels) {
  if (levels.empty()) throw Error(ErrorKind::BadK, "at least one hierarchy level is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require_k(dendrogram, levels[i]);
    if (i > 0 && levels[i] <= levels[i - 1]) throw Error(ErrorKind::BadK, "hierarchy levels must be strictly increasing");
  }
  nlohmann::json doc;
  doc["leaves"] = dendrogram.leaves;
  doc["levels"] = nlohmann::json::array();
  std::vector<int> previous;
  for (const std::size_t k : levels) {
    const StateSeries level = cut(dendrogram, k);
    std::vector<std::size_t> sizes(k, 0);
    std::vector<int> parent(k, -1);
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t n = 0; n < level.labels.size(); ++n) {
      const int label = level.labels[n];
      ++sizes[static_cast<std::size_t>(label)];
      members[static_cast<std::size_t>(label)].push_back(n);
      if (!previous.empty()) parent[static_cast<std::size_t>(label)] = previous[n];
    }
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t c = 0; c < k; ++c) {
      nlohmann::json cluster{{"id", c}, {"size", sizes[c]}, {"members", members[c]}};
      cluster["parent"] = previous.empty() ? nlohmann::json(nullptr) : nlohmann::json(parent[c]);
      clusters.push_back(std::move(cluster));
    }
    doc["levels"].push_back({{"k", k}, {"clusters", clusters}});
    previous = level.labels;
  }
  return doc;
}

nlohmann::json to_json(const Dendrogram& dendrogram) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : dendrogram.merges) merges.push_back({m.left, m.right, m.cost, m.size});
  return {{"leaves", dendrogram.leaves}, {"linkage", "ward"}, {"merges", merges}};
}

Dendrogram dendrogram_from_json(const nlohmann::json& doc) {
  try {
    Dendrogram d;
    d.leaves = doc.at("leaves").get<std::size_t>();
    for (const auto& m : doc.at("merges")) {
      d.merges.push_back({m.at(0).get<std::size_t>(), m.at(1).get<std::size_t>(), m.at(2).get<double>(),
                          m.at(3).get<std::size_t>()});
    }
    if (d.leaves < 1 || d.merges.size() + 1 != d.leaves) {
      throw Error(ErrorKind::MalformedInput, "dendrogram must hold N-1 merges");
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("dendrogram document: ") + e.what());
  }
}

void write_state_series(std::ostream& out, const StateSeries& series) {
  out << "slot,timestamp,state\n";
  for (std::size_t n = 0; n < series.labels.size(); ++n) {
    out << n << ',' << (n < series.slot_times.size() ? series.slot_times[n] : 0) << ',' << series.labels[n] << '\n';
  }
}

StateSeries read_state_series(std::istream& in) {
  StateSeries series;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty() || line_no == 1) continue;
    const auto fields = io::split(text, ',');
    std::int64_t slot = 0, ts = 0, state = 0;
    if (fields.size() != 3 || !io::parse_int64(fields[0], slot) || !io::parse_int64(fields[1], ts) ||
        !io::parse_int64(fields[2], state) || state < 0 || slot != static_cast<std::int64_t>(series.labels.size())) {
      throw Error(ErrorKind::MalformedInput, "state series line " + std::to_string(line_no) + " is malformed");
    }
    series.labels.push_back(static_cast<int>(state));
    series.slot_times.push_back(ts);
    max_label = std::max(max_label, static_cast<int>(state));
  }
  if (series.labels.empty()) throw Error(ErrorKind::EmptyInput, "state series is empty");
  series.k = static_cast<std::size_t>(max_label + 1);
  return series;
}

std::vector<StateProfile> profile_states(const StateSeries& series, const ingest::CityImageSeries& images,
                                         const DayTypeCalendar& calendar) {
  if (series.labels.size() != images.slots) {
    throw Error(ErrorKind::LengthMismatch, "state series and image series differ in length");
  }
  const auto& spec = images.spec;
  const std::size_t slots_per_day =
      std::max<std::size_t>(1, static_cast<std::size_t>(86400 / spec.slot_duration_s));
  std::vector<StateProfile> profiles(series.k);
  for (std::size_t s = 0; s < series.k; ++s) {
    profiles[s].state = static_cast<int>(s);
    profiles[s].slot_of_day.assign(slots_per_day, 0);
  }
  for (std::size_t n = 0; n < series.labels.size(); ++n) {
    auto& p = profiles.at(static_cast<std::size_t>(series.labels[n]));
    const std::int64_t ts = n < series.slot_times.size() ? series.slot_times[n] : spec.slot_start(n);
    ++p.slot_count;
    for (std::size_t c = 0; c < 3; ++c) {
      p.channel_means[c] += static_cast<double>(images.channel_total(n, static_cast<ingest::Channel>(c)));
    }
    const auto sod = static_cast<std::size_t>(calendar.seconds_into_day(ts) / spec.slot_duration_s) % slots_per_day;
    ++p.slot_of_day[sod];
    ++p.day_types[static_cast<std::size_t>(calendar.day_type(ts))];
  }
  for (auto& p : profiles) {
    if (p.slot_count == 0) continue;
    for (double& m : p.channel_means) m /= static_cast<double>(p.slot_count);
  }
  return profiles;
}

nlohmann::json to_json(const std::vector<StateProfile>& profiles) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& p : profiles) {
    doc.push_back({{"state", p.state},
                   {"slots", p.slot_count},
                   {"mean_staying", p.channel_means[0]},
                   {"mean_leaving", p.channel_means[1]},
                   {"mean_arriving", p.channel_means[2]},
                   {"slot_of_day", p.slot_of_day},
                   {"weekday", p.day_types[0]},
                   {"weekend", p.day_types[1]},
                   {"holiday", p.day_types[2]}});
  }
  return doc;
}

}  // namespace urbanrhythm::states
