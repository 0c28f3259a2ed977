#include "aniso/models.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace aniso {

bool TestFunction::smooth_at(const Vec& z, double tol) const {
  if (!smooth) {
    for (const Vec& p : nonsmooth_points) {
      if ((z - p).norm() <= tol) return false;
    }
    // A declared-nonsmooth function is smooth away from its kinks only if a
    // gradient is available at all.
    return static_cast<bool>(grad);
  }
  return true;
}

TestFunction make_test_function(const std::string& name) {
  TestFunction f;
  f.name = name;
  if (name == "abs") {
    f.dimension = 1;
    f.lower_bound = 0.0;
    f.smooth = false;
    f.nonsmooth_points = {Vec::Zero(1)};
    f.prox_regular_everywhere = true;  // convex
    f.value = [](const Vec& z) { return std::abs(z[0]); };
    f.grad = [](const Vec& z) {
      Vec g(1);
      g[0] = z[0] > 0 ? 1.0 : -1.0;
      return g;
    };
  } else if (name == "neg_cos") {
    f.dimension = 1;
    f.lower_bound = -1.0;
    f.value = [](const Vec& z) { return -std::cos(z[0]); };
    f.grad = [](const Vec& z) {
      Vec g(1);
      g[0] = std::sin(z[0]);
      return g;
    };
  } else if (name == "double_well") {
    f.dimension = 1;
    f.lower_bound = 0.0;
    f.value = [](const Vec& z) {
      const double s = z[0] * z[0] - 1.0;
      return s * s;
    };
    f.grad = [](const Vec& z) {
      Vec g(1);
      g[0] = 4.0 * z[0] * (z[0] * z[0] - 1.0);
      return g;
    };
  } else if (name == "rosenbrock_2d") {
    f.dimension = 2;
    f.lower_bound = 0.0;
    f.value = [](const Vec& z) {
      const double a = 1.0 - z[0];
      const double b = z[1] - z[0] * z[0];
      return a * a + 100.0 * b * b;
    };
    f.grad = [](const Vec& z) {
      Vec g(2);
      const double b = z[1] - z[0] * z[0];
      g[0] = -2.0 * (1.0 - z[0]) - 400.0 * z[0] * b;
      g[1] = 200.0 * b;
      return g;
    };
  } else if (name == "two_point_indicator") {
    f.dimension = 1;
    f.lower_bound = 0.0;
    f.smooth = false;
    f.prox_regular_everywhere = true;  // indicator of a finite set
    f.value = [](const Vec& z) {
      return (z[0] == 0.0 || z[0] == 1.0) ? 0.0 : kInf;
    };
    f.grad = nullptr;
  } else if (name == "quadratic") {
    f.dimension = 1;
    f.lower_bound = 0.0;
    f.value = [](const Vec& z) { return 0.5 * z[0] * z[0]; };
    f.grad = [](const Vec& z) { return z; };
  } else {
    throw std::invalid_argument("unknown test function: " + name);
  }
  return f;
}

std::vector<std::string> test_function_names() {
  return {"abs", "neg_cos", "double_well", "rosenbrock_2d", "two_point_indicator",
          "quadratic"};
}

std::pair<double, std::optional<Vec>> testfn_eval(const TestFunction& f, const Vec& z) {
  if (z.size() != f.dimension) {
    throw std::invalid_argument("test function dimension mismatch");
  }
  std::optional<Vec> g;
  if (f.smooth_at(z)) g = f.grad(z);
  return {f.value(z), g};
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "two_gaussians") return DatasetKind::two_gaussians;
  if (s == "two_moons") return DatasetKind::two_moons;
  throw std::invalid_argument("unknown dataset kind: " + s);
}

Dataset synth_dataset(DatasetKind kind, int n, double noise, unsigned seed) {
  if (n < 2) throw std::invalid_argument("dataset needs n >= 2");
  Dataset d;
  d.num_classes = 2;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n0 = n / 2;        // class 0: floor(n/2)
  const int n1 = n - n0;       // class 1: ceil(n/2)
  const double pi = std::acos(-1.0);
  for (int c = 0; c < 2; ++c) {
    const int nc = c == 0 ? n0 : n1;
    for (int i = 0; i < nc; ++i) {
      Vec x(2);
      if (kind == DatasetKind::two_gaussians) {
        const double m = c == 0 ? -1.0 : 1.0;
        x[0] = m + noise * gauss(rng);
        x[1] = m + noise * gauss(rng);
      } else {
        const double t = pi * unit(rng);
        if (c == 0) {
          x[0] = std::cos(t);
          x[1] = std::sin(t);
        } else {
          x[0] = 1.0 - std::cos(t);
          x[1] = 0.5 - std::sin(t);
        }
        x[0] += noise * gauss(rng);
        x[1] += noise * gauss(rng);
      }
      d.inputs.push_back(x);
      d.labels.push_back(c);
    }
  }
  return d;
}

std::vector<std::vector<int>> shard_dataset(const Dataset& d, int m, ShardMode mode) {
  if (m < 1) throw std::invalid_argument("M must be >= 1");
  const int n = d.size();
  std::vector<std::vector<int>> shards(m);
  if (mode == ShardMode::full_overlap) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (int j = 0; j < m; ++j) shards[j] = all;
  } else {
    if (n < m) throw std::invalid_argument("disjoint sharding needs |I| >= M");
    for (int i = 0; i < n; ++i) shards[i % m].push_back(i);
  }
  return shards;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const int dim = d.inputs.empty() ? 0 : static_cast<int>(d.inputs[0].size());
  for (int i = 0; i < dim; ++i) out << "x" << i << ",";
  out << "label\n";
  out.precision(17);
  for (int i = 0; i < d.size(); ++i) {
    for (int k = 0; k < dim; ++k) out << d.inputs[i][k] << ",";
    out << d.labels[i] << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Dataset d;
  std::string line;
  std::getline(in, line);  // header
  int max_label = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() < 2) throw std::runtime_error("bad dataset row: " + line);
    Vec x(static_cast<int>(vals.size()) - 1);
    for (int i = 0; i + 1 < static_cast<int>(vals.size()); ++i) x[i] = vals[i];
    const int label = static_cast<int>(vals.back());
    d.inputs.push_back(x);
    d.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  d.num_classes = max_label + 1;
  return d;
}

int MlpModel::param_count() const {
  int n = 0;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return n;
}

std::vector<int> MlpModel::layer_param_shapes() const {
  std::vector<int> shapes;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    shapes.push_back(layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1]);
  }
  return shapes;
}

namespace {

struct ForwardPass {
  std::vector<Vec> activations;     // per layer input a_0 = x
  std::vector<Vec> preactivations;  // s_l = W_l a_{l-1} + b_l
};

// z layout per layer: row-major W (fan_out x fan_in) then b.
ForwardPass forward(const std::vector<int>& sizes, const Vec& z, const Vec& x) {
  ForwardPass fp;
  fp.activations.push_back(x);
  int off = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fin = sizes[l], fout = sizes[l + 1];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        w(z.data() + off, fout, fin);
    Eigen::Map<const Vec> b(z.data() + off + fin * fout, fout);
    Vec s = w * fp.activations.back() + b;
    fp.preactivations.push_back(s);
    const bool last = l + 2 == sizes.size();
    fp.activations.push_back(last ? s : s.cwiseMax(0.0));
    off += fin * fout + fout;
  }
  return fp;
}

}  // namespace

Vec MlpModel::logits(const Vec& z, const Vec& x) const {
  return forward(layer_sizes, z, x).activations.back();
}

int MlpModel::predict(const Vec& z, const Vec& x) const {
  Vec lg = logits(z, x);
  int best = 0;
  lg.maxCoeff(&best);
  return best;
}

std::pair<double, Vec> MlpModel::loss_grad(const Vec& z, const Dataset& data,
                                           const std::vector<int>& batch) const {
  if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
  if (z.size() != param_count()) throw std::invalid_argument("parameter size mismatch");
  const int out_dim = layer_sizes.back();
  double loss = 0.0;
  Vec grad = Vec::Zero(z.size());
  for (int idx : batch) {
    const int label = data.labels[idx];
    if (label < 0 || label >= out_dim) {
      throw std::invalid_argument("label out of range: " + std::to_string(label));
    }
    ForwardPass fp = forward(layer_sizes, z, data.inputs[idx]);
    const Vec& lg = fp.activations.back();
    const double mx = lg.maxCoeff();
    const double lse = mx + std::log((lg.array() - mx).exp().sum());
    loss += lse - lg[label];
    // Backprop: dL/dlogits = softmax - onehot.
    Vec delta = (lg.array() - lse).exp();
    delta[label] -= 1.0;
    int off = static_cast<int>(z.size());
    for (int l = static_cast<int>(layer_sizes.size()) - 2; l >= 0; --l) {
      const int fin = layer_sizes[l], fout = layer_sizes[l + 1];
      off -= fin * fout + fout;
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
          w(z.data() + off, fout, fin);
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>
          gw(grad.data() + off, fout, fin);
      Eigen::Map<Vec> gb(grad.data() + off + fin * fout, fout);
      gw += delta * fp.activations[l].transpose();
      gb += delta;
      if (l > 0) {
        Vec back = w.transpose() * delta;
        // ReLU mask from the preactivation of the layer below.
        const Vec& s = fp.preactivations[l - 1];
        for (int i = 0; i < back.size(); ++i) {
          if (s[i] <= 0.0) back[i] = 0.0;
        }
        delta = back;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  loss = loss * inv + 0.5 * nu * z.squaredNorm();
  grad = grad * inv + nu * z;
  return {loss, grad};
}

double MlpModel::loss(const Vec& z, const Dataset& data,
                      const std::vector<int>& batch) const {
  if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
  double loss = 0.0;
  for (int idx : batch) {
    const Vec lg = logits(z, data.inputs[idx]);
    const double mx = lg.maxCoeff();
    const double lse = mx + std::log((lg.array() - mx).exp().sum());
    loss += lse - lg[data.labels[idx]];
  }
  return loss / static_cast<double>(batch.size()) + 0.5 * nu * z.squaredNorm();
}

double MlpModel::error_rate(const Vec& z, const Dataset& data) const {
  int wrong = 0;
  for (int i = 0; i < data.size(); ++i) {
    if (predict(z, data.inputs[i]) != data.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / data.size();
}

Vec MlpModel::init_params(unsigned seed) const {
  std::mt19937_64 rng(seed);
  Vec z(param_count());
  int off = 0;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fin = layer_sizes[l], fout = layer_sizes[l + 1];
    const double s = 1.0 / std::sqrt(static_cast<double>(fin));
    std::uniform_real_distribution<double> u(-s, s);
    for (int i = 0; i < fin * fout; ++i) z[off + i] = u(rng);
    for (int i = 0; i < fout; ++i) z[off + fin * fout + i] = u(rng);
    off += fin * fout + fout;
  }
  return z;
}

}  // namespace aniso
