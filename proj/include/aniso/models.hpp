#pragma once

#include "aniso/potentials.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aniso {

/// A 1-D/2-D test objective with known regularity metadata. Immutable and
/// pure; gradient is defined wherever the function is smooth.
struct TestFunction {
  std::string name;
  int dimension = 1;
  double lower_bound = -kInf;
  bool smooth = true;
  std::vector<Vec> nonsmooth_points;
  bool prox_regular_everywhere = true;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;  // valid away from nonsmooth_points

  bool smooth_at(const Vec& z, double tol = 1e-12) const;
};

/// Library lookup: abs, neg_cos, double_well, rosenbrock_2d,
/// two_point_indicator, quadratic.
TestFunction make_test_function(const std::string& name);
std::vector<std::string> test_function_names();

/// (value, gradient-if-smooth-here).
std::pair<double, std::optional<Vec>> testfn_eval(const TestFunction& f, const Vec& z);

struct Dataset {
  std::vector<Vec> inputs;
  std::vector<int> labels;
  int num_classes = 2;

  int size() const { return static_cast<int>(inputs.size()); }
};

enum class DatasetKind { two_gaussians, two_moons };
enum class ShardMode { full_overlap, disjoint };

/// Deterministic synthetic dataset with balanced classes.
Dataset synth_dataset(DatasetKind kind, int n, double noise, unsigned seed);
DatasetKind dataset_kind_from_string(const std::string& s);

/// full_overlap: M copies of 0..n-1; disjoint: partition with sizes
/// differing by at most one.
std::vector<std::vector<int>> shard_dataset(const Dataset& d, int m, ShardMode mode);

void write_dataset_csv(const Dataset& d, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

/// Dense rectifier network with identity output, softmax NLL loss and an
/// L2 regularizer (nu/2)||z||^2. Parameters are flattened per layer as
/// row-major weight matrix then bias.
struct MlpModel {
  std::vector<int> layer_sizes;  // e.g. {2, 16, 2}
  double nu = 1e-4;

  int param_count() const;
  /// Per-layer flattened parameter block sizes (fan_in*fan_out + fan_out).
  std::vector<int> layer_param_shapes() const;

  Vec logits(const Vec& z, const Vec& x) const;
  int predict(const Vec& z, const Vec& x) const;

  /// Mean softmax NLL over the batch plus the regularizer, with its exact
  /// gradient from manual backpropagation.
  std::pair<double, Vec> loss_grad(const Vec& z,
                                   const Dataset& data,
                                   const std::vector<int>& batch) const;
  double loss(const Vec& z, const Dataset& data, const std::vector<int>& batch) const;
  double error_rate(const Vec& z, const Dataset& data) const;

  /// Uniform [-s, s] with s = 1/sqrt(fan_in), deterministic per seed.
  Vec init_params(unsigned seed) const;
};

}  // namespace aniso
