#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, square unless noted

struct Eigen {
  Vec values;  // descending
  Mat vectors; // one unit vector per row
};

inline void canonical_sign(Vec& v) {
  double big = 0.0;
  for (double x : v) big = std::max(big, std::abs(x));
  for (double& x : v) {
    if (std::abs(x) >= (1.0 - 1e-9) * big) {
      if (x < 0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

// Cyclic Jacobi rotations on a symmetric matrix.
inline Eigen jacobi(Mat a) {
  const std::size_t n = a.size();
  Mat v(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a[i][i] * a[i][i];
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    }
    if (off <= 1e-32 * std::max(diag, 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
  Eigen out;
  for (auto idx : order) {
    out.values.push_back(a[idx][idx]);
    Vec col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][idx];
    canonical_sign(col);
    out.vectors.push_back(col);
  }
  return out;
}

struct Pca {
  Vec mean;
  Mat components;
  Vec ratios;
};

// Centred PCA over rows; keeps ratio > threshold (at least one), or all when
// threshold < 0. Zero total variance gives e1 with ratio 1.
inline Pca pca(const Mat& rows, double threshold) {
  const std::size_t n = rows.size(), d = rows[0].size();
  Pca out;
  out.mean.assign(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k) out.mean[k] += r[k];
  for (double& m : out.mean) m /= static_cast<double>(n);
  Mat cov(d, Vec(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov[a][b] += (r[a] - out.mean[a]) * (r[b] - out.mean[b]);
  double total = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) cov[a][b] /= static_cast<double>(n);
    total += cov[a][a];
  }
  if (total <= 0.0) {
    Vec e1(d, 0.0);
    e1[0] = 1.0;
    out.components.push_back(e1);
    out.ratios.push_back(1.0);
    return out;
  }
  const auto eig = jacobi(cov);
  for (std::size_t k = 0; k < d; ++k) {
    const double ratio = eig.values[k] / total;
    if (threshold >= 0.0 && k > 0 && !(ratio > threshold)) break;
    out.components.push_back(eig.vectors[k]);
    out.ratios.push_back(ratio);
  }
  return out;
}

inline Vec project(const Pca& p, const Vec& x) {
  Vec out;
  for (const auto& c : p.components) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - p.mean[k]) * c[k];
    out.push_back(s);
  }
  return out;
}

using Image = std::vector<std::vector<Vec>>;  // [i][j][channel]

// Literal Saak: pooled channel KLT, zero padding, then 2x2 assembly, PCA and
// interleaved sign-to-position until a single pixel remains.
inline Mat saak_features(const std::vector<Image>& images, double threshold, std::size_t* stage_count = nullptr) {
  const std::size_t n = images.size(), rows = images[0].size(), cols = images[0][0].size();
  Mat pixels;
  for (const auto& img : images)
    for (const auto& row : img)
      for (const auto& px : row) pixels.push_back(px);
  const Pca klt = pca(pixels, -1.0);

  std::size_t side = 1;
  while (side < std::max(rows, cols)) side *= 2;
  side = std::max<std::size_t>(side, 2);
  const std::size_t top = (side - rows) / 2, left = (side - cols) / 2;
  std::vector<Image> cur(n, Image(side, std::vector<Vec>(side, Vec(klt.components.size(), 0.0))));
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) cur[m][top + i][left + j] = project(klt, images[m][i][j]);

  Mat features(n);
  std::size_t stages = 0;
  while (side > 1) {
    const std::size_t half = side / 2;
    Mat grids;
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t gi = 0; gi < half; ++gi)
        for (std::size_t gj = 0; gj < half; ++gj) {
          Vec g;
          for (auto [di, dj] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 0}, std::pair{1, 1}}) {
            const auto& px = cur[m][2 * gi + di][2 * gj + dj];
            g.insert(g.end(), px.begin(), px.end());
          }
          grids.push_back(g);
        }
    const Pca basis = pca(grids, threshold);
    std::vector<Image> next(n, Image(half, std::vector<Vec>(half)));
    std::size_t g = 0;
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t gi = 0; gi < half; ++gi)
        for (std::size_t gj = 0; gj < half; ++gj) {
          Vec sp;
          for (double c : project(basis, grids[g++])) {
            sp.push_back(c > 0 ? c : 0.0);
            sp.push_back(c < 0 ? -c : 0.0);
          }
          next[m][gi][gj] = sp;
        }
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t gi = 0; gi < half; ++gi)
        for (std::size_t gj = 0; gj < half; ++gj)
          features[m].insert(features[m].end(), next[m][gi][gj].begin(), next[m][gi][gj].end());
    cur = std::move(next);
    side = half;
    ++stages;
  }
  if (stage_count) *stage_count = stages;
  return features;
}

struct WardMerge {
  std::size_t left, right;
  double cost;
  std::size_t size;
};

// Greedy Ward by direct centroid search over every pair of live clusters.
inline std::vector<WardMerge> ward(const Mat& points) {
  const std::size_t n = points.size();
  std::map<std::size_t, std::vector<std::size_t>> live;
  for (std::size_t i = 0; i < n; ++i) live[i] = {i};
  auto centroid = [&](const std::vector<std::size_t>& members) {
    Vec c(points[0].size(), 0.0);
    for (auto m : members)
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += points[m][k];
    for (double& x : c) x /= static_cast<double>(members.size());
    return c;
  };
  std::vector<WardMerge> merges;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = INFINITY;
    std::pair<std::size_t, std::size_t> pick{SIZE_MAX, SIZE_MAX};
    for (auto a = live.begin(); a != live.end(); ++a) {
      for (auto b = std::next(a); b != live.end(); ++b) {
        const Vec ca = centroid(a->second), cb = centroid(b->second);
        double d2 = 0.0;
        for (std::size_t k = 0; k < ca.size(); ++k) d2 += (ca[k] - cb[k]) * (ca[k] - cb[k]);
        const double na = static_cast<double>(a->second.size()), nb = static_cast<double>(b->second.size());
        const double cost = na * nb / (na + nb) * d2;
        // Pairs arrive in (min id, max id) order, so strict < keeps the smallest on ties.
        if (cost < best) {
          best = cost;
          pick = {a->first, b->first};
        }
      }
    }
    auto merged = live[pick.first];
    merged.insert(merged.end(), live[pick.second].begin(), live[pick.second].end());
    live.erase(pick.first);
    live.erase(pick.second);
    merges.push_back({pick.first, pick.second, best, merged.size()});
    live[n + step] = merged;
  }
  return merges;
}

// Labels after applying the first n - k merges, numbered by first occurrence.
inline std::vector<int> cut(std::size_t n, const std::vector<WardMerge>& merges, std::size_t k) {
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (std::size_t s = 0; s + k < n; ++s) {
    parent[find(merges[s].left)] = n + s;
    parent[find(merges[s].right)] = n + s;
  }
  std::map<std::size_t, int> ids;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(ids.emplace(find(i), static_cast<int>(ids.size())).first->second);
  return labels;
}

// DBSCAN by definition: cores have >= min_samples points within eps (self
// included); clusters are the eps-connected components of cores, numbered by
// their smallest core; a border point joins the earliest cluster with a core
// neighbour.
inline std::vector<int> dbscan(const std::vector<std::vector<int>>& pts, double eps, std::size_t min_samples) {
  const std::size_t n = pts.size();
  auto dist = [&](std::size_t a, std::size_t b) {
    std::size_t d = 0;
    for (std::size_t k = 0; k < pts[a].size(); ++k) d += pts[a][k] != pts[b][k];
    return static_cast<double>(d);
  };
  std::vector<bool> core(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t c = 0;
    for (std::size_t q = 0; q < n; ++q) c += dist(p, q) <= eps;
    core[p] = c >= min_samples;
  }
  std::vector<int> comp(n, -1);
  int next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (!core[p] || comp[p] >= 0) continue;
    std::vector<std::size_t> stack{p};
    comp[p] = next;
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < n; ++q)
        if (core[q] && comp[q] < 0 && dist(x, q) <= eps) {
          comp[q] = next;
          stack.push_back(q);
        }
    }
    ++next;
  }
  std::vector<int> label(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    if (core[p]) {
      label[p] = comp[p];
      continue;
    }
    for (std::size_t q = 0; q < n; ++q)
      if (core[q] && dist(p, q) <= eps && (label[p] < 0 || comp[q] < label[p])) label[p] = comp[q];
  }
  return label;
}

// Transitive reduction of a DAG given as an edge set.
inline std::set<std::pair<std::size_t, std::size_t>> transitive_reduction(
    const std::set<std::pair<std::size_t, std::size_t>>& edges) {
  std::map<std::size_t, std::set<std::size_t>> out;
  for (auto [a, b] : edges) out[a].insert(b);
  auto reach_without = [&](std::size_t from, std::size_t to) {
    // path of length >= 2
    std::set<std::size_t> seen;
    std::vector<std::size_t> stack;
    for (auto m : out[from])
      if (m != to) stack.push_back(m);
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      if (x == to) return true;
      if (!seen.insert(x).second) continue;
      for (auto m : out[x]) stack.push_back(m);
    }
    return false;
  };
  std::set<std::pair<std::size_t, std::size_t>> kept;
  for (auto e : edges)
    if (!reach_without(e.first, e.second)) kept.insert(e);
  return kept;
}

// Adjusted Rand index from the contingency table.
template <typename A, typename B>
double adjusted_rand(const std::vector<A>& x, const std::vector<B>& y) {
  std::map<A, std::map<B, double>> table;
  std::map<A, double> rows;
  std::map<B, double> cols;
  for (std::size_t i = 0; i < x.size(); ++i) {
    table[x[i]][y[i]] += 1;
    rows[x[i]] += 1;
    cols[y[i]] += 1;
  }
  auto c2 = [](double v) { return v * (v - 1) / 2; };
  double index = 0, a = 0, b = 0;
  for (auto& [r, line] : table)
    for (auto& [c, v] : line) index += c2(v);
  for (auto& [r, v] : rows) a += c2(v);
  for (auto& [c, v] : cols) b += c2(v);
  const double expected = a * b / c2(static_cast<double>(x.size()));
  const double max = (a + b) / 2;
  return max == expected ? 1.0 : (index - expected) / (max - expected);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("urbanrhythm_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace oracle
