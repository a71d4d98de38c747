#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "urbanrhythm/ingest.hpp"
#include "urbanrhythm/linalg.hpp"

namespace urbanrhythm::saak {

using linalg::DenseMatrix;
using linalg::PcaBasis;

// N images of rows x cols pixels with `depth` real channels, stored
// [image][row][col][channel].
struct ImageStack {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t depth = 0;
  std::vector<double> values;

  ImageStack() = default;
  ImageStack(std::size_t n, std::size_t r, std::size_t c, std::size_t d)
      : count(n), rows(r), cols(c), depth(d), values(n * r * c * d, 0.0) {}

  double& at(std::size_t n, std::size_t i, std::size_t j, std::size_t ch) {
    return values[((n * rows + i) * cols + j) * depth + ch];
  }
  double at(std::size_t n, std::size_t i, std::size_t j, std::size_t ch) const {
    return values[((n * rows + i) * cols + j) * depth + ch];
  }
  std::span<const double> pixel(std::size_t n, std::size_t i, std::size_t j) const {
    return {values.data() + ((n * rows + i) * cols + j) * depth, depth};
  }
  std::span<double> pixel(std::size_t n, std::size_t i, std::size_t j) {
    return {values.data() + ((n * rows + i) * cols + j) * depth, depth};
  }
  std::span<const double> image(std::size_t n) const {
    return {values.data() + n * rows * cols * depth, rows * cols * depth};
  }

  friend bool operator==(const ImageStack&, const ImageStack&) = default;
};

// Casts counts to reals, optionally through log1p.
ImageStack to_stack(const ingest::CityImageSeries& series, bool log_scale = false);

// Sign-to-position: each coefficient becomes (max(v, 0), max(-v, 0)).
std::vector<double> sp_transform(std::span<const double> v);
std::vector<double> sp_inverse(std::span<const double> w);

std::size_t next_power_of_two(std::size_t n);
// Zero-pads to S x S (S = next power of two >= max(rows, cols), at least 2),
// centred with the extra row/column on the high side.
ImageStack pad_to_square(const ImageStack& stack);

struct StageModel {
  std::size_t index = 0;        // 1-based; stage k sees 2^k x 2^k patches
  std::size_t input_side = 0;
  std::size_t input_depth = 0;
  PcaBasis basis;               // over 4 * input_depth grid vectors

  std::size_t output_side() const { return input_side / 2; }
  std::size_t output_depth() const { return 2 * basis.size(); }
};

struct SaakOptions {
  double variance_threshold = 0.03;
  bool log_scale = false;
};

struct SaakModel {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;
  SaakOptions options;
  PcaBasis channel_klt;
  std::size_t padded_side = 0;
  std::vector<StageModel> stages;

  std::size_t feature_dim() const;
};

nlohmann::json to_json(const SaakModel& model);
SaakModel saak_model_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PcaBasis& basis);
PcaBasis basis_from_json(const nlohmann::json& doc);

// Grid vectors of every 2x2 block, one row per (image, block row, block col).
DenseMatrix assemble_grids(const ImageStack& stack);

struct StageFit {
  StageModel model;
  ImageStack output;
};

StageFit fit_stage(const ImageStack& stack, double variance_threshold, std::size_t index = 1);
ImageStack apply_stage(const StageModel& stage, const ImageStack& stack);

struct SaakFit {
  SaakModel model;
  DenseMatrix features;  // N x feature_dim, non-negative
};

SaakFit fit_saak(const ImageStack& stack, const SaakOptions& options = {});
SaakFit fit_saak(const ingest::CityImageSeries& series, const SaakOptions& options = {});

// Applies the channel KLT to every pixel (no padding).
ImageStack apply_channel_klt(const PcaBasis& klt, const ImageStack& stack);

DenseMatrix transform(const SaakModel& model, const ImageStack& stack);
DenseMatrix transform(const SaakModel& model, const ingest::CityImageSeries& series);

struct Reduction {
  PcaBasis basis;
  DenseMatrix features;    // N x min(target, rank)
  DenseMatrix projection;  // N x 2, first two reduced coordinates
};

Reduction reduce(const DenseMatrix& raw, std::size_t target_dim = 128);

}  // namespace urbanrhythm::saak
