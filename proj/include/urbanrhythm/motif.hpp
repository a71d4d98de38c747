#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace urbanrhythm::motif {

struct MotifParams {
  std::size_t window_length = 6;     // l_w
  std::size_t stride = 2;            // s_w
  std::size_t window_threshold = 1;  // sigma_w, per-window Hamming bound
  std::size_t f_threshold = 3;
  std::size_t f_threshold_day = 1;   // for motifs spanning a whole day
  bool within_day = true;
  bool exclude_trivial = true;       // drop window pairs closer than ceil(l_w / s_w)
  double eps_factor = 0.25;
  double eps_max = 8.0;
  std::size_t min_samples = 2;
  std::size_t slots_per_day = 48;
  std::size_t day_offset = 0;        // slot-of-day of series slot 0

  void validate() const;
  std::size_t min_window_offset() const;
  bool within_one_day(std::size_t start, std::size_t length) const;
  std::size_t frequency_threshold(std::size_t length) const;
  double eps(std::size_t length) const;
};

std::size_t hamming(std::span<const int> a, std::span<const int> b);

// Start slots of every full window; trailing partial windows are dropped.
std::vector<std::size_t> cut_windows(std::size_t series_length, std::size_t window_length, std::size_t stride);

class CollisionMatrix {
 public:
  CollisionMatrix() = default;
  explicit CollisionMatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool value) { bits_[i * n_ + j] = value ? 1 : 0; }

 private:
  std::size_t n_ = 0;
  std::vector<unsigned char> bits_;
};

CollisionMatrix collision_matrix(std::span<const int> series, std::span<const std::size_t> window_starts,
                                 std::size_t window_length, std::size_t threshold);

// Maximal diagonal run of collisions strictly above the main diagonal.
struct Trace {
  std::size_t first = 0;   // window index of the earlier occurrence
  std::size_t second = 0;  // window index of the later occurrence
  std::size_t length = 0;  // windows in the run

  friend bool operator==(const Trace&, const Trace&) = default;
};

// Runs whose window offset is below min_offset are skipped.
std::vector<Trace> extract_traces(const CollisionMatrix& mat, std::size_t min_offset = 1);

struct Motif {
  std::size_t start = 0;
  std::size_t length = 0;
  std::vector<int> symbols;

  friend bool operator==(const Motif&, const Motif&) = default;
};

using MotifsByLength = std::map<std::size_t, std::vector<Motif>>;

// A certified pair of similar subsequences, first < second.
struct MotifPair {
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t length = 0;

  friend auto operator<=>(const MotifPair&, const MotifPair&) = default;
};

// Every aligned pair certified by a sub-run of some trace, honouring the
// within-day restriction. No frequency filtering.
std::vector<MotifPair> discover_motif_pairs(std::span<const int> series, const MotifParams& params);

// Motifs deduplicated by (start, length), grouped by length, with lengths
// below the frequency threshold removed.
MotifsByLength discover_motifs(std::span<const int> series, const MotifParams& params);

// Exhaustive reference: all aligned pairs whose constituent windows each
// differ by at most sigma_w. Limited to series of at most 500 slots.
std::vector<MotifPair> brute_force_motifs(std::span<const int> series, std::size_t length, const MotifParams& params);

struct MotifClass {
  std::size_t id = 0;
  std::size_t length = 0;
  std::vector<Motif> members;  // sorted by start
  std::size_t exemplar = 0;    // index into members

  std::size_t covered_slots() const;
};

std::vector<MotifClass> cluster_classes(const MotifsByLength& motifs, const MotifParams& params);

using Edge = std::pair<std::size_t, std::size_t>;  // father id -> son id

struct MotifGraph {
  std::vector<std::size_t> nodes;
  std::vector<Edge> containment;  // before grandson pruning
  std::vector<Edge> edges;        // after grandson pruning
};

// Edge i -> j when some member of class i strictly longer than some member of
// class j contains it.
std::vector<Edge> containment_edges(const std::vector<MotifClass>& classes);
// Removes z -> y whenever z -> x and x -> y are both present.
std::vector<Edge> prune_grandsons(const std::vector<Edge>& edges);
MotifGraph build_graph(const std::vector<MotifClass>& classes);

bool is_acyclic(const std::vector<std::size_t>& nodes, const std::vector<Edge>& edges);
// Nodes with in-degree and out-degree both exactly one; omitted from the DOT view.
std::vector<std::size_t> hidden_nodes(const MotifGraph& graph);
bool reachable(const std::vector<Edge>& edges, std::size_t from, std::size_t to);

nlohmann::json to_json(const std::vector<MotifClass>& classes);
nlohmann::json to_json(const MotifGraph& graph);
std::string to_dot(const MotifGraph& graph, const std::vector<MotifClass>& classes);

}  // namespace urbanrhythm::motif
