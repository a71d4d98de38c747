#include "urbanrhythm/motif.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/parallel.hpp"

namespace urbanrhythm::motif {

void MotifParams::validate() const {
  if (window_length < 1) throw Error(ErrorKind::InvalidConfig, "window length must be at least 1");
  if (stride < 1 || stride > window_length) throw Error(ErrorKind::InvalidConfig, "stride must lie in [1, l_w]");
  if (window_threshold > window_length) throw Error(ErrorKind::InvalidConfig, "sigma_w must lie in [0, l_w]");
  if (slots_per_day < 1) throw Error(ErrorKind::InvalidConfig, "slots_per_day must be positive");
  if (min_samples < 1) throw Error(ErrorKind::InvalidConfig, "min_samples must be positive");
  if (!(eps_factor >= 0.0) || !(eps_max >= 0.0)) throw Error(ErrorKind::InvalidConfig, "eps must be non-negative");
}

std::size_t MotifParams::min_window_offset() const {
  if (!exclude_trivial) return 1;
  return std::max<std::size_t>(1, (window_length + stride - 1) / stride);
}

bool MotifParams::within_one_day(std::size_t start, std::size_t length) const {
  if (!within_day) return true;
  return (start + day_offset) / slots_per_day == (start + length - 1 + day_offset) / slots_per_day;
}

std::size_t MotifParams::frequency_threshold(std::size_t length) const {
  return length == slots_per_day ? f_threshold_day : f_threshold;
}

double MotifParams::eps(std::size_t length) const {
  return std::min(eps_factor * static_cast<double>(length), eps_max);
}

std::size_t hamming(std::span<const int> a, std::span<const int> b) {
  std::size_t d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d += a[k] != b[k] ? 1 : 0;
  return d;
}

std::vector<std::size_t> cut_windows(std::size_t series_length, std::size_t window_length, std::size_t stride) {
  if (window_length == 0 || stride == 0) throw Error(ErrorKind::InvalidConfig, "window length and stride must be positive");
  if (series_length < window_length) {
    throw Error(ErrorKind::SeriesTooShort, "series of length " + std::to_string(series_length) +
                                               " is shorter than the window length " + std::to_string(window_length));
  }
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window_length <= series_length; s += stride) starts.push_back(s);
  return starts;
}

CollisionMatrix collision_matrix(std::span<const int> series, std::span<const std::size_t> window_starts,
                                 std::size_t window_length, std::size_t threshold) {
  const std::size_t n = window_starts.size();
  CollisionMatrix mat(n);
  parallel_for(0, n, [&](std::size_t i) {
    const auto wi = series.subspan(window_starts[i], window_length);
    for (std::size_t j = 0; j < n; ++j) {
      const auto wj = series.subspan(window_starts[j], window_length);
      mat.set(i, j, hamming(wi, wj) <= threshold);
    }
  });
  return mat;
}

std::vector<Trace> extract_traces(const CollisionMatrix& mat, std::size_t min_offset) {
  std::vector<Trace> traces;
  const std::size_t n = mat.size();
  min_offset = std::max<std::size_t>(1, min_offset);
  for (std::size_t offset = min_offset; offset < n; ++offset) {
    std::size_t i = 0;
    while (i + offset < n) {
      if (!mat(i, i + offset)) {
        ++i;
        continue;
      }
      std::size_t len = 0;
      while (i + len + offset < n && mat(i + len, i + len + offset)) ++len;
      traces.push_back({i, i + offset, len});
      i += len;
    }
  }
  std::sort(traces.begin(), traces.end(), [](const Trace& a, const Trace& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  return traces;
}

namespace {

// Calls emit(first_window, second_window, windows) for every sub-run of every
// trace that satisfies the within-day restriction.
template <typename Emit>
void for_each_subrun(std::span<const int> series, const MotifParams& params, Emit&& emit) {
  params.validate();
  const auto starts = cut_windows(series.size(), params.window_length, params.stride);
  if (starts.size() < 2) return;
  const CollisionMatrix mat = collision_matrix(series, starts, params.window_length, params.window_threshold);
  for (const Trace& t : extract_traces(mat, params.min_window_offset())) {
    for (std::size_t s = 0; s < t.length; ++s) {
      const std::size_t a = (t.first + s) * params.stride;
      const std::size_t b = (t.second + s) * params.stride;
      for (std::size_t windows = 1; s + windows <= t.length; ++windows) {
        const std::size_t l = params.window_length + (windows - 1) * params.stride;
        if (!params.within_one_day(a, l) || !params.within_one_day(b, l)) break;
        emit(t.first + s, t.second + s, windows);
      }
    }
  }
}

Motif make_motif(std::span<const int> series, std::size_t start, std::size_t length) {
  const auto sub = series.subspan(start, length);
  return {start, length, std::vector<int>(sub.begin(), sub.end())};
}

}  // namespace

std::vector<MotifPair> discover_motif_pairs(std::span<const int> series, const MotifParams& params) {
  std::vector<MotifPair> pairs;
  for_each_subrun(series, params, [&](std::size_t i, std::size_t j, std::size_t windows) {
    pairs.push_back({i * params.stride, j * params.stride, params.window_length + (windows - 1) * params.stride});
  });
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

MotifsByLength discover_motifs(std::span<const int> series, const MotifParams& params) {
  params.validate();
  const auto starts = cut_windows(series.size(), params.window_length, params.stride);
  const std::size_t w = starts.size();
  // seen[windows - 1][window index]
  std::vector<std::vector<unsigned char>> seen;
  for_each_subrun(series, params, [&](std::size_t i, std::size_t j, std::size_t windows) {
    if (seen.size() < windows) seen.resize(windows, std::vector<unsigned char>(w, 0));
    seen[windows - 1][i] = 1;
    seen[windows - 1][j] = 1;
  });
  MotifsByLength out;
  for (std::size_t k = 0; k < seen.size(); ++k) {
    const std::size_t l = params.window_length + k * params.stride;
    std::vector<Motif> motifs;
    for (std::size_t i = 0; i < w; ++i) {
      if (seen[k][i]) motifs.push_back(make_motif(series, i * params.stride, l));
    }
    if (!motifs.empty() && motifs.size() >= params.frequency_threshold(l)) out.emplace(l, std::move(motifs));
  }
  return out;
}

std::vector<MotifPair> brute_force_motifs(std::span<const int> series, std::size_t length, const MotifParams& params) {
  params.validate();
  if (series.size() > 500) throw Error(ErrorKind::TooLargeForOracle, "brute-force motif oracle is limited to 500 slots");
  std::vector<MotifPair> pairs;
  const std::size_t lw = params.window_length;
  const std::size_t sw = params.stride;
  if (length > series.size() || length < lw || (length - lw) % sw != 0) return pairs;
  const std::size_t windows = (length - lw) / sw + 1;
  const std::size_t min_gap = params.min_window_offset() * sw;
  for (std::size_t a = 0; a + length <= series.size(); a += sw) {
    if (!params.within_one_day(a, length)) continue;
    for (std::size_t b = a + min_gap; b + length <= series.size(); b += sw) {
      if (!params.within_one_day(b, length)) continue;
      bool similar = true;
      for (std::size_t k = 0; k < windows && similar; ++k) {
        std::size_t diff = 0;
        for (std::size_t t = 0; t < lw; ++t) diff += series[a + k * sw + t] != series[b + k * sw + t] ? 1 : 0;
        similar = diff <= params.window_threshold;
      }
      if (similar) pairs.push_back({a, b, length});
    }
  }
  return pairs;
}

std::size_t MotifClass::covered_slots() const {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& m : members) spans.emplace_back(m.start, m.start + m.length);
  std::sort(spans.begin(), spans.end());
  std::size_t covered = 0, reach = 0;
  for (const auto& [lo, hi] : spans) {
    const std::size_t from = std::max(lo, reach);
    if (hi > from) covered += hi - from;
    reach = std::max(reach, hi);
  }
  return covered;
}

std::vector<MotifClass> cluster_classes(const MotifsByLength& motifs, const MotifParams& params) {
  params.validate();
  std::vector<MotifClass> classes;
  for (auto it = motifs.rbegin(); it != motifs.rend(); ++it) {
    const std::size_t length = it->first;
    std::vector<Motif> points = it->second;
    std::sort(points.begin(), points.end(), [](const Motif& a, const Motif& b) { return a.start < b.start; });
    const double eps = params.eps(length);
    const std::size_t n = points.size();
    auto neighbours = [&](std::size_t p) {
      std::vector<std::size_t> out;
      for (std::size_t q = 0; q < n; ++q) {
        if (static_cast<double>(hamming(points[p].symbols, points[q].symbols)) <= eps) out.push_back(q);
      }
      return out;
    };

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int cluster = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (label[p] != kUnvisited) continue;
      const auto seeds = neighbours(p);
      if (seeds.size() < params.min_samples) {
        label[p] = kNoise;
        continue;
      }
      label[p] = cluster;
      std::deque<std::size_t> queue(seeds.begin(), seeds.end());
      while (!queue.empty()) {
        const std::size_t q = queue.front();
        queue.pop_front();
        if (label[q] == kNoise) label[q] = cluster;  // border point
        if (label[q] != kUnvisited) continue;
        label[q] = cluster;
        const auto more = neighbours(q);
        if (more.size() >= params.min_samples) queue.insert(queue.end(), more.begin(), more.end());
      }
      ++cluster;
    }

    std::vector<MotifClass> found(static_cast<std::size_t>(cluster));
    for (std::size_t p = 0; p < n; ++p) {
      if (label[p] >= 0) found[static_cast<std::size_t>(label[p])].members.push_back(points[p]);
    }
    std::vector<MotifClass> kept;
    for (auto& c : found) {
      if (c.members.size() < std::max(params.frequency_threshold(length), params.min_samples)) continue;
      c.length = length;
      std::size_t best = 0, best_sum = static_cast<std::size_t>(-1);
      for (std::size_t a = 0; a < c.members.size(); ++a) {
        std::size_t sum = 0;
        for (std::size_t b = 0; b < c.members.size(); ++b) sum += hamming(c.members[a].symbols, c.members[b].symbols);
        if (sum < best_sum) {
          best_sum = sum;
          best = a;
        }
      }
      c.exemplar = best;
      kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end(),
              [](const MotifClass& a, const MotifClass& b) { return a.members.front().start < b.members.front().start; });
    for (auto& c : kept) classes.push_back(std::move(c));
  }
  for (std::size_t id = 0; id < classes.size(); ++id) classes[id].id = id;
  return classes;
}

std::vector<Edge> containment_edges(const std::vector<MotifClass>& classes) {
  std::vector<Edge> edges;
  for (const auto& father : classes) {
    std::vector<std::size_t> starts;
    for (const auto& m : father.members) starts.push_back(m.start);
    for (const auto& son : classes) {
      if (son.length >= father.length) continue;
      const bool contained = std::any_of(son.members.begin(), son.members.end(), [&](const Motif& s) {
        // father start must lie in [s.start + s.length - father.length, s.start]
        const std::size_t hi = s.start;
        const std::size_t lo = s.start + s.length >= father.length ? s.start + s.length - father.length : 0;
        auto it = std::lower_bound(starts.begin(), starts.end(), lo);
        return it != starts.end() && *it <= hi;
      });
      if (contained) edges.emplace_back(father.id, son.id);
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<Edge> prune_grandsons(const std::vector<Edge>& edges) {
  std::map<std::size_t, std::set<std::size_t>> sons;
  for (const auto& [f, s] : edges) sons[f].insert(s);
  std::vector<Edge> kept;
  for (const auto& [z, y] : edges) {
    bool grandson = false;
    for (const std::size_t x : sons[z]) {
      if (x != y && sons.count(x) && sons[x].count(y)) {
        grandson = true;
        break;
      }
    }
    if (!grandson) kept.emplace_back(z, y);
  }
  return kept;
}

MotifGraph build_graph(const std::vector<MotifClass>& classes) {
  MotifGraph graph;
  for (const auto& c : classes) graph.nodes.push_back(c.id);
  graph.containment = containment_edges(classes);
  graph.edges = prune_grandsons(graph.containment);
  return graph;
}

bool is_acyclic(const std::vector<std::size_t>& nodes, const std::vector<Edge>& edges) {
  std::map<std::size_t, std::size_t> indegree;
  std::map<std::size_t, std::vector<std::size_t>> out;
  for (auto n : nodes) indegree[n] = 0;
  for (const auto& [a, b] : edges) {
    ++indegree[b];
    indegree.try_emplace(a, 0);
    out[a].push_back(b);
  }
  std::deque<std::size_t> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.push_back(n);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const auto n = ready.front();
    ready.pop_front();
    ++visited;
    for (auto m : out[n]) {
      if (--indegree[m] == 0) ready.push_back(m);
    }
  }
  return visited == indegree.size();
}

std::vector<std::size_t> hidden_nodes(const MotifGraph& graph) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> degree;  // in, out
  for (const auto& [a, b] : graph.edges) {
    ++degree[a].second;
    ++degree[b].first;
  }
  std::vector<std::size_t> hidden;
  for (auto n : graph.nodes) {
    const auto it = degree.find(n);
    if (it != degree.end() && it->second.first == 1 && it->second.second == 1) hidden.push_back(n);
  }
  return hidden;
}

bool reachable(const std::vector<Edge>& edges, std::size_t from, std::size_t to) {
  std::map<std::size_t, std::vector<std::size_t>> out;
  for (const auto& [a, b] : edges) out[a].push_back(b);
  std::set<std::size_t> seen{from};
  std::deque<std::size_t> queue{from};
  while (!queue.empty()) {
    const auto n = queue.front();
    queue.pop_front();
    if (n == to) return true;
    for (auto m : out[n]) {
      if (seen.insert(m).second) queue.push_back(m);
    }
  }
  return false;
}

nlohmann::json to_json(const std::vector<MotifClass>& classes) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& c : classes) {
    std::vector<std::size_t> starts;
    for (const auto& m : c.members) starts.push_back(m.start);
    doc.push_back({{"id", c.id},
                   {"length", c.length},
                   {"members", starts},
                   {"covered_slots", c.covered_slots()},
                   {"exemplar_start", c.members[c.exemplar].start},
                   {"exemplar", c.members[c.exemplar].symbols}});
  }
  return doc;
}

nlohmann::json to_json(const MotifGraph& graph) {
  auto edges = [](const std::vector<Edge>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [a, b] : list) out.push_back({a, b});
    return out;
  };
  return {{"nodes", graph.nodes},
          {"edges", edges(graph.edges)},
          {"containment", edges(graph.containment)},
          {"hidden", hidden_nodes(graph)}};
}

std::string to_dot(const MotifGraph& graph, const std::vector<MotifClass>& classes) {
  static constexpr const char* kBuckets[] = {"#deebf7", "#9ecae1", "#6baed6", "#3182bd", "#08519c"};
  std::map<std::size_t, const MotifClass*> by_id;
  std::size_t lo = static_cast<std::size_t>(-1), hi = 0;
  for (const auto& c : classes) {
    by_id[c.id] = &c;
    lo = std::min(lo, c.covered_slots());
    hi = std::max(hi, c.covered_slots());
  }
  const auto hidden_list = hidden_nodes(graph);
  const std::set<std::size_t> hidden(hidden_list.begin(), hidden_list.end());
  std::map<std::size_t, std::vector<std::size_t>> sons;
  for (const auto& [a, b] : graph.edges) sons[a].push_back(b);

  std::ostringstream dot;
  dot << "digraph motif_family {\n  rankdir=TB;\n  node [shape=circle, style=filled, fontname=\"Helvetica\"];\n";
  std::map<std::size_t, std::vector<std::size_t>, std::greater<>> layers;
  for (auto id : graph.nodes) {
    if (!hidden.count(id)) layers[by_id.at(id)->length].push_back(id);
  }
  for (const auto& [length, ids] : layers) {
    dot << "  { rank=same;";
    for (auto id : ids) dot << " c" << id << ";";
    dot << " }\n";
  }
  for (const auto& [length, ids] : layers) {
    for (auto id : ids) {
      const auto covered = by_id.at(id)->covered_slots();
      const std::size_t bucket = hi > lo ? std::min<std::size_t>(4, (covered - lo) * 5 / (hi - lo + 1)) : 2;
      dot << "  c" << id << " [label=\"C" << id << "\\n" << length << "\", fillcolor=\"" << kBuckets[bucket]
          << "\", tooltip=\"covers " << covered << " slots\"];\n";
    }
  }
  std::map<Edge, bool> drawn;
  for (const auto& [length, ids] : layers) {
    for (auto id : ids) {
      for (auto son : sons[id]) {
        std::size_t target = son;
        bool spliced = false;
        while (hidden.count(target)) {
          target = sons[target].front();
          spliced = true;
        }
        const auto [it, fresh] = drawn.emplace(Edge{id, target}, spliced);
        if (!fresh) it->second = it->second && spliced;
      }
    }
  }
  for (const auto& [edge, spliced] : drawn) {
    dot << "  c" << edge.first << " -> c" << edge.second << (spliced ? " [style=dashed]" : "") << ";\n";
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace urbanrhythm::motif
