#include "urbanrhythm/saak.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/parallel.hpp"

namespace urbanrhythm::saak {

namespace {

constexpr int kModelVersion = 1;

std::size_t pad_before(std::size_t extent, std::size_t side) { return (side - extent) / 2; }

void require_square_even(const ImageStack& stack) {
  if (stack.rows != stack.cols || stack.rows < 2 || stack.rows % 2 != 0) {
    throw Error(ErrorKind::DimensionMismatch,
                "stage input must be square with an even side, got " + std::to_string(stack.rows) + "x" +
                    std::to_string(stack.cols));
  }
}

// Stage pyramid shared by fitting and transforming, so both produce the same
// bits for the same stack.
void append_stage_output(const ImageStack& out, DenseMatrix& features, std::size_t& column) {
  const std::size_t width = out.rows * out.cols * out.depth;
  for (std::size_t n = 0; n < out.count; ++n) {
    const auto src = out.image(n);
    std::copy(src.begin(), src.end(), features.row(n).begin() + static_cast<std::ptrdiff_t>(column));
  }
  column += width;
}

}  // namespace

ImageStack to_stack(const ingest::CityImageSeries& series, bool log_scale) {
  const auto& spec = series.spec;
  ImageStack stack(series.slots, static_cast<std::size_t>(spec.rows), static_cast<std::size_t>(spec.cols), 3);
  for (std::size_t k = 0; k < series.counts.size(); ++k) {
    const double v = static_cast<double>(series.counts[k]);
    stack.values[k] = log_scale ? std::log1p(v) : v;
  }
  return stack;
}

std::vector<double> sp_transform(std::span<const double> v) {
  std::vector<double> out(2 * v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    out[2 * k] = v[k] >= 0.0 ? v[k] : 0.0;  // keeps -0.0 so the inverse is exact
    out[2 * k + 1] = v[k] < 0.0 ? -v[k] : 0.0;
  }
  return out;
}

std::vector<double> sp_inverse(std::span<const double> w) {
  std::vector<double> out(w.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = w[2 * k] - w[2 * k + 1];
  return out;
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

ImageStack pad_to_square(const ImageStack& stack) {
  const std::size_t side = std::max<std::size_t>(2, next_power_of_two(std::max(stack.rows, stack.cols)));
  if (side == stack.rows && side == stack.cols) return stack;
  ImageStack out(stack.count, side, side, stack.depth);
  const std::size_t top = pad_before(stack.rows, side);
  const std::size_t left = pad_before(stack.cols, side);
  for (std::size_t n = 0; n < stack.count; ++n) {
    for (std::size_t i = 0; i < stack.rows; ++i) {
      for (std::size_t j = 0; j < stack.cols; ++j) {
        const auto src = stack.pixel(n, i, j);
        std::copy(src.begin(), src.end(), out.pixel(n, i + top, j + left).begin());
      }
    }
  }
  return out;
}

std::size_t SaakModel::feature_dim() const {
  std::size_t dim = 0;
  for (const auto& s : stages) dim += s.output_side() * s.output_side() * s.output_depth();
  return dim;
}

DenseMatrix assemble_grids(const ImageStack& stack) {
  require_square_even(stack);
  const std::size_t half = stack.rows / 2;
  const std::size_t d = stack.depth;
  DenseMatrix grids(stack.count * half * half, 4 * d);
  for (std::size_t n = 0; n < stack.count; ++n) {
    for (std::size_t gi = 0; gi < half; ++gi) {
      for (std::size_t gj = 0; gj < half; ++gj) {
        auto row = grids.row((n * half + gi) * half + gj);
        const std::size_t i = 2 * gi;
        const std::size_t j = 2 * gj;
        auto dst = row.begin();
        for (const auto& [di, dj] : {std::pair{0, 0}, {0, 1}, {1, 0}, {1, 1}}) {
          const auto src = stack.pixel(n, i + di, j + dj);
          dst = std::copy(src.begin(), src.end(), dst);
        }
      }
    }
  }
  return grids;
}

ImageStack apply_stage(const StageModel& stage, const ImageStack& stack) {
  require_square_even(stack);
  if (stack.rows != stage.input_side || stack.depth != stage.input_depth) {
    throw Error(ErrorKind::DimensionMismatch, "stack does not match stage " + std::to_string(stage.index));
  }
  const DenseMatrix grids = assemble_grids(stack);
  const std::size_t half = stage.output_side();
  const std::size_t k = stage.basis.size();
  ImageStack out(stack.count, half, half, 2 * k);
  parallel_for(0, grids.rows(), [&](std::size_t g) {
    std::vector<double> coords(k);
    linalg::project_row(stage.basis, grids.row(g), coords);
    const std::size_t n = g / (half * half);
    const std::size_t gi = (g / half) % half;
    const std::size_t gj = g % half;
    auto dst = out.pixel(n, gi, gj);
    for (std::size_t c = 0; c < k; ++c) {
      dst[2 * c] = coords[c] > 0.0 ? coords[c] : 0.0;
      dst[2 * c + 1] = coords[c] < 0.0 ? -coords[c] : 0.0;
    }
  });
  return out;
}

StageFit fit_stage(const ImageStack& stack, double variance_threshold, std::size_t index) {
  require_square_even(stack);
  const std::size_t half = stack.rows / 2;
  if (stack.count * half * half < 2) {
    throw Error(ErrorKind::DegenerateInput, "stage needs at least 2 grid vectors");
  }
  StageFit fit;
  fit.model.index = index;
  fit.model.input_side = stack.rows;
  fit.model.input_depth = stack.depth;
  fit.model.basis = linalg::fit_pca(assemble_grids(stack), linalg::RetentionRule::min_ratio(variance_threshold));
  fit.output = apply_stage(fit.model, stack);
  return fit;
}

ImageStack apply_channel_klt(const PcaBasis& klt, const ImageStack& stack) {
  if (klt.dimension() != stack.depth) {
    throw Error(ErrorKind::DimensionMismatch, "channel count does not match the channel KLT");
  }
  ImageStack out(stack.count, stack.rows, stack.cols, klt.size());
  const std::size_t pixels = stack.count * stack.rows * stack.cols;
  parallel_for(0, pixels, [&](std::size_t p) {
    linalg::project_row(klt, {stack.values.data() + p * stack.depth, stack.depth},
                        {out.values.data() + p * out.depth, out.depth});
  });
  return out;
}

SaakFit fit_saak(const ImageStack& stack, const SaakOptions& options) {
  if (stack.count < 2) throw Error(ErrorKind::DegenerateInput, "Saak fitting needs at least 2 images");
  if (stack.depth == 0 || stack.rows == 0 || stack.cols == 0) {
    throw Error(ErrorKind::DegenerateInput, "empty image stack");
  }
  SaakFit fit;
  auto& model = fit.model;
  model.rows = stack.rows;
  model.cols = stack.cols;
  model.channels = stack.depth;
  model.options = options;

  const DenseMatrix pixels(stack.count * stack.rows * stack.cols, stack.depth, stack.values);
  model.channel_klt = linalg::fit_klt(pixels);
  ImageStack current = pad_to_square(apply_channel_klt(model.channel_klt, stack));
  model.padded_side = current.rows;

  std::vector<ImageStack> outputs;
  for (std::size_t index = 1; current.rows > 1; ++index) {
    StageFit stage = fit_stage(current, options.variance_threshold, index);
    model.stages.push_back(std::move(stage.model));
    outputs.push_back(stage.output);
    current = std::move(stage.output);
  }

  fit.features = DenseMatrix(stack.count, model.feature_dim());
  std::size_t column = 0;
  for (const auto& out : outputs) append_stage_output(out, fit.features, column);
  return fit;
}

SaakFit fit_saak(const ingest::CityImageSeries& series, const SaakOptions& options) {
  return fit_saak(to_stack(series, options.log_scale), options);
}

DenseMatrix transform(const SaakModel& model, const ImageStack& stack) {
  if (stack.rows != model.rows || stack.cols != model.cols || stack.depth != model.channels) {
    throw Error(ErrorKind::DimensionMismatch, "image geometry does not match the Saak model");
  }
  ImageStack current = pad_to_square(apply_channel_klt(model.channel_klt, stack));
  DenseMatrix features(stack.count, model.feature_dim());
  std::size_t column = 0;
  for (const auto& stage : model.stages) {
    current = apply_stage(stage, current);
    append_stage_output(current, features, column);
  }
  return features;
}

DenseMatrix transform(const SaakModel& model, const ingest::CityImageSeries& series) {
  return transform(model, to_stack(series, model.options.log_scale));
}

Reduction reduce(const DenseMatrix& raw, std::size_t target_dim) {
  if (raw.rows() < 2) throw Error(ErrorKind::DegenerateInput, "reduction needs at least 2 rows");
  Reduction r;
  r.basis = linalg::fit_pca(raw, linalg::RetentionRule::fixed_k(target_dim));
  r.features = linalg::project(r.basis, raw);
  r.projection = DenseMatrix(raw.rows(), 2);
  for (std::size_t n = 0; n < raw.rows(); ++n) {
    for (std::size_t c = 0; c < std::min<std::size_t>(2, r.features.cols()); ++c) {
      r.projection(n, c) = r.features(n, c);
    }
  }
  return r;
}

nlohmann::json to_json(const PcaBasis& basis) {
  nlohmann::json components = nlohmann::json::array();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto row = basis.components.row(k);
    components.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"mean", basis.mean},
          {"components", components},
          {"eigenvalues", basis.eigenvalues},
          {"explained_variance_ratio", basis.explained_variance_ratio}};
}

PcaBasis basis_from_json(const nlohmann::json& doc) {
  PcaBasis basis;
  basis.mean = doc.at("mean").get<std::vector<double>>();
  const auto& comps = doc.at("components");
  basis.components = DenseMatrix(comps.size(), basis.mean.size());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto row = comps[k].get<std::vector<double>>();
    if (row.size() != basis.mean.size()) throw Error(ErrorKind::MalformedInput, "basis component width mismatch");
    std::copy(row.begin(), row.end(), basis.components.row(k).begin());
  }
  basis.eigenvalues = doc.at("eigenvalues").get<std::vector<double>>();
  basis.explained_variance_ratio = doc.at("explained_variance_ratio").get<std::vector<double>>();
  return basis;
}

nlohmann::json to_json(const SaakModel& model) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : model.stages) {
    stages.push_back({{"index", s.index},
                      {"input_side", s.input_side},
                      {"input_depth", s.input_depth},
                      {"output_depth", s.output_depth()},
                      {"basis", to_json(s.basis)}});
  }
  return {{"format", "urbanrhythm-saak-model"},
          {"version", kModelVersion},
          {"rows", model.rows},
          {"cols", model.cols},
          {"channels", model.channels},
          {"padded_side", model.padded_side},
          {"pad_top", pad_before(model.rows, model.padded_side)},
          {"pad_left", pad_before(model.cols, model.padded_side)},
          {"retention", {{"min_ratio", model.options.variance_threshold}}},
          {"log_scale", model.options.log_scale},
          {"feature_dim", model.feature_dim()},
          {"channel_klt", to_json(model.channel_klt)},
          {"stages", stages}};
}

SaakModel saak_model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorKind::MalformedInput, "unsupported Saak model version");
    }
    SaakModel model;
    model.rows = doc.at("rows").get<std::size_t>();
    model.cols = doc.at("cols").get<std::size_t>();
    model.channels = doc.at("channels").get<std::size_t>();
    model.padded_side = doc.at("padded_side").get<std::size_t>();
    model.options.variance_threshold = doc.at("retention").at("min_ratio").get<double>();
    model.options.log_scale = doc.at("log_scale").get<bool>();
    model.channel_klt = basis_from_json(doc.at("channel_klt"));
    for (const auto& s : doc.at("stages")) {
      StageModel stage;
      stage.index = s.at("index").get<std::size_t>();
      stage.input_side = s.at("input_side").get<std::size_t>();
      stage.input_depth = s.at("input_depth").get<std::size_t>();
      stage.basis = basis_from_json(s.at("basis"));
      model.stages.push_back(std::move(stage));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("Saak model document: ") + e.what());
  }
}

}  // namespace urbanrhythm::saak
