#include "aniso/potentials.hpp"

#include <cmath>
#include <sstream>

namespace aniso {

namespace {

const double kHalfPi = std::asin(1.0) * 1.0;  // pi/2

double sec2(double s) {
  const double c = std::cos(s);
  return 1.0 / (c * c);
}

}  // namespace

PotentialKind potential_kind_from_string(const std::string& s) {
  if (s == "quad") return PotentialKind::quad;
  if (s == "cubic") return PotentialKind::cubic;
  if (s == "tan") return PotentialKind::tan;
  if (s == "tan-sep" || s == "tan_sep") return PotentialKind::tan_sep;
  if (s == "log") return PotentialKind::log;
  if (s == "log-sep" || s == "log_sep") return PotentialKind::log_sep;
  throw std::invalid_argument("unknown potential kind: " + s);
}

std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::quad: return "quad";
    case PotentialKind::cubic: return "cubic";
    case PotentialKind::tan: return "tan";
    case PotentialKind::tan_sep: return "tan-sep";
    case PotentialKind::log: return "log";
    case PotentialKind::log_sep: return "log-sep";
  }
  return "?";
}

double Potential::bregman(const Vec& w_prime, const Vec& w) const {
  if (!in_domain(w)) return kInf;
  const double vp = value(w_prime);
  if (!std::isfinite(vp)) return kInf;
  return vp - value(w) - gradient(w).dot(w_prime - w);
}

BasePotential::BasePotential(PotentialKind kind, int dimension, double eps_quad,
                             double quad_coeff)
    : kind_(kind), dim_(dimension), eps_quad_(eps_quad), quad_coeff_(quad_coeff) {
  if (dimension < 1) throw std::invalid_argument("potential dimension must be >= 1");
  if (eps_quad < 0) throw std::invalid_argument("eps_quad must be >= 0");
  if (quad_coeff <= 0) throw std::invalid_argument("quad_coeff must be > 0");
}

void BasePotential::require_dim(const Vec& w) const {
  if (w.size() != dim_) {
    std::ostringstream os;
    os << "potential dimension mismatch: expected " << dim_ << ", got " << w.size();
    throw std::invalid_argument(os.str());
  }
}

void BasePotential::require_domain(const Vec& w) const {
  if (!in_domain(w)) {
    std::ostringstream os;
    os << to_string(kind_) << ": point outside dom phi (|w| = " << w.norm() << ")";
    throw std::domain_error(os.str());
  }
}

double BasePotential::domain_radius() const {
  switch (kind_) {
    case PotentialKind::quad:
    case PotentialKind::cubic: return kInf;
    case PotentialKind::tan:
    case PotentialKind::tan_sep: return std::sqrt(kHalfPi);
    case PotentialKind::log:
    case PotentialKind::log_sep: return 1.0;
  }
  return kInf;
}

bool BasePotential::domain_is_per_coordinate() const {
  return kind_ == PotentialKind::tan_sep || kind_ == PotentialKind::log_sep;
}

bool BasePotential::admissible() const {
  return kind_ != PotentialKind::cubic || eps_quad_ > 0.0;
}

bool BasePotential::in_domain(const Vec& w) const {
  require_dim(w);
  const double r = domain_radius();
  if (!std::isfinite(r)) return true;
  if (domain_is_per_coordinate()) {
    return w.cwiseAbs().maxCoeff() < r;
  }
  return w.norm() < r;
}

double BasePotential::value(const Vec& w) const {
  require_dim(w);
  if (!in_domain(w)) return kInf;
  switch (kind_) {
    case PotentialKind::quad:
      return quad_coeff_ * w.squaredNorm();
    case PotentialKind::cubic:
      return w.array().abs().cube().sum() + 0.5 * eps_quad_ * w.squaredNorm();
    case PotentialKind::tan:
      return std::tan(w.squaredNorm());
    case PotentialKind::tan_sep: {
      double s = 0.0;
      for (int i = 0; i < w.size(); ++i) s += std::tan(w[i] * w[i]);
      return s;
    }
    case PotentialKind::log:
      return -std::log1p(-w.squaredNorm());
    case PotentialKind::log_sep: {
      double s = 0.0;
      for (int i = 0; i < w.size(); ++i) s += -std::log1p(-w[i] * w[i]);
      return s;
    }
  }
  return kInf;
}

Vec BasePotential::gradient(const Vec& w) const {
  require_dim(w);
  require_domain(w);
  switch (kind_) {
    case PotentialKind::quad:
      return 2.0 * quad_coeff_ * w;
    case PotentialKind::cubic: {
      Vec g(dim_);
      for (int i = 0; i < dim_; ++i) {
        g[i] = 3.0 * w[i] * std::abs(w[i]) + eps_quad_ * w[i];
      }
      return g;
    }
    case PotentialKind::tan:
      return 2.0 * sec2(w.squaredNorm()) * w;
    case PotentialKind::tan_sep: {
      Vec g(dim_);
      for (int i = 0; i < dim_; ++i) g[i] = 2.0 * w[i] * sec2(w[i] * w[i]);
      return g;
    }
    case PotentialKind::log:
      return 2.0 / (1.0 - w.squaredNorm()) * w;
    case PotentialKind::log_sep: {
      Vec g(dim_);
      for (int i = 0; i < dim_; ++i) g[i] = 2.0 * w[i] / (1.0 - w[i] * w[i]);
      return g;
    }
  }
  return Vec::Zero(dim_);
}

Mat BasePotential::hessian(const Vec& w) const {
  require_dim(w);
  require_domain(w);
  switch (kind_) {
    case PotentialKind::quad:
      return 2.0 * quad_coeff_ * Mat::Identity(dim_, dim_);
    case PotentialKind::cubic: {
      Mat h = Mat::Zero(dim_, dim_);
      for (int i = 0; i < dim_; ++i) h(i, i) = 6.0 * std::abs(w[i]) + eps_quad_;
      return h;
    }
    case PotentialKind::tan: {
      const double s = w.squaredNorm();
      const double c2 = sec2(s);
      return 2.0 * c2 * Mat::Identity(dim_, dim_) +
             8.0 * c2 * std::tan(s) * (w * w.transpose());
    }
    case PotentialKind::tan_sep: {
      Mat h = Mat::Zero(dim_, dim_);
      for (int i = 0; i < dim_; ++i) {
        const double s = w[i] * w[i];
        const double c2 = sec2(s);
        h(i, i) = 2.0 * c2 + 8.0 * s * c2 * std::tan(s);
      }
      return h;
    }
    case PotentialKind::log: {
      const double d = 1.0 - w.squaredNorm();
      return 2.0 / d * Mat::Identity(dim_, dim_) +
             4.0 / (d * d) * (w * w.transpose());
    }
    case PotentialKind::log_sep: {
      Mat h = Mat::Zero(dim_, dim_);
      for (int i = 0; i < dim_; ++i) {
        const double d = 1.0 - w[i] * w[i];
        h(i, i) = (2.0 + 2.0 * w[i] * w[i]) / (d * d);
      }
      return h;
    }
  }
  return Mat::Zero(dim_, dim_);
}

namespace {

// Damped Newton on grad phi(w) = y starting at 0. The Hessian is positive
// definite on the interior, so the step is a descent direction for the
// residual; halving keeps the iterate inside the (open) domain.
Vec newton_invert(const Potential& p, const Vec& y, int max_iter = 200,
                  double tol = 1e-10) {
  Vec w = Vec::Zero(p.dimension());
  double res = (p.gradient(w) - y).norm();
  for (int it = 0; it < max_iter; ++it) {
    if (res <= tol) return w;
    const Vec r = y - p.gradient(w);
    const Mat h = p.hessian(w);
    Vec d = h.ldlt().solve(r);
    if (!d.allFinite()) d = r;  // singular Hessian fallback
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const Vec trial = w + alpha * d;
      if (p.in_domain(trial)) {
        const double tres = (p.gradient(trial) - y).norm();
        if (tres < res) {
          w = trial;
          res = tres;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  if (res <= tol) return w;
  throw InversionError("conjugate-gradient Newton did not converge, residual " +
                       std::to_string(res));
}

// Scalar solve of 3w^2 + eps*w = a, a >= 0.
double cubic_inverse_scalar(double a, double eps) {
  return (-eps + std::sqrt(eps * eps + 12.0 * a)) / 6.0;
}

}  // namespace

Vec BasePotential::inverse_gradient(const Vec& y) const {
  require_dim(y);
  switch (kind_) {
    case PotentialKind::quad:
      return y / (2.0 * quad_coeff_);
    case PotentialKind::cubic: {
      // Separable closed form; Newton from 0 is unusable for eps_quad = 0
      // (zero Hessian at the origin).
      Vec w(dim_);
      for (int i = 0; i < dim_; ++i) {
        const double s = y[i] < 0 ? -1.0 : 1.0;
        w[i] = s * cubic_inverse_scalar(std::abs(y[i]), eps_quad_);
      }
      return w;
    }
    default:
      return newton_invert(*this, y);
  }
}

std::string BasePotential::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(dim=" << dim_;
  if (eps_quad_ > 0) os << ",eps=" << eps_quad_;
  if (kind_ == PotentialKind::quad && quad_coeff_ != 0.5) os << ",coeff=" << quad_coeff_;
  os << ")";
  return os.str();
}

BlockPotential::BlockPotential(PotentialKind kind, std::vector<int> block_sizes,
                               double eta, double eps_quad, double quad_coeff)
    : sizes_(std::move(block_sizes)), eta_(eta) {
  if (eta <= 0) throw std::invalid_argument("eta must be > 0");
  if (sizes_.empty()) throw std::invalid_argument("block sizes must be nonempty");
  dim_ = 0;
  for (int s : sizes_) {
    offsets_.push_back(dim_);
    blocks_.emplace_back(kind, s, eps_quad, quad_coeff);
    dim_ += s;
  }
}

bool BlockPotential::in_domain(const Vec& w) const {
  if (w.size() != dim_) throw std::invalid_argument("block potential dimension mismatch");
  for (size_t l = 0; l < blocks_.size(); ++l) {
    if (!blocks_[l].in_domain(w.segment(offsets_[l], sizes_[l]) / eta_)) return false;
  }
  return true;
}

double BlockPotential::value(const Vec& w) const {
  if (w.size() != dim_) throw std::invalid_argument("block potential dimension mismatch");
  double s = 0.0;
  for (size_t l = 0; l < blocks_.size(); ++l) {
    s += blocks_[l].value(w.segment(offsets_[l], sizes_[l]) / eta_);
  }
  return s;
}

Vec BlockPotential::gradient(const Vec& w) const {
  Vec g(dim_);
  for (size_t l = 0; l < blocks_.size(); ++l) {
    g.segment(offsets_[l], sizes_[l]) =
        blocks_[l].gradient(w.segment(offsets_[l], sizes_[l]) / eta_) / eta_;
  }
  return g;
}

Mat BlockPotential::hessian(const Vec& w) const {
  Mat h = Mat::Zero(dim_, dim_);
  for (size_t l = 0; l < blocks_.size(); ++l) {
    h.block(offsets_[l], offsets_[l], sizes_[l], sizes_[l]) =
        blocks_[l].hessian(w.segment(offsets_[l], sizes_[l]) / eta_) / (eta_ * eta_);
  }
  return h;
}

Vec BlockPotential::inverse_gradient(const Vec& y) const {
  Vec w(dim_);
  for (size_t l = 0; l < blocks_.size(); ++l) {
    w.segment(offsets_[l], sizes_[l]) =
        eta_ * blocks_[l].inverse_gradient(eta_ * y.segment(offsets_[l], sizes_[l]));
  }
  return w;
}

double BlockPotential::domain_radius() const { return blocks_.front().domain_radius(); }
bool BlockPotential::domain_is_per_coordinate() const {
  return blocks_.front().domain_is_per_coordinate();
}
bool BlockPotential::admissible() const { return blocks_.front().admissible(); }

std::string BlockPotential::describe() const {
  std::ostringstream os;
  os << blocks_.front().describe() << " x " << blocks_.size() << " blocks";
  if (eta_ != 1.0) os << ", eta=" << eta_;
  return os.str();
}

PotentialPtr separable(const BasePotential& base, int copies) {
  if (copies < 1) throw std::invalid_argument("copies must be >= 1");
  std::vector<int> sizes(copies, base.dimension());
  return std::make_shared<BlockPotential>(base.kind(), sizes, 1.0, base.eps_quad(),
                                          base.quad_coeff());
}

PotentialPtr layer_scaled(PotentialKind kind, double eta,
                          const std::vector<int>& shapes, double eps_quad,
                          double quad_coeff) {
  return std::make_shared<BlockPotential>(kind, shapes, eta, eps_quad, quad_coeff);
}

ParsedPotentialSpec parse_potential_fields(const std::string& spec) {
  ParsedPotentialSpec out;
  std::stringstream ss(spec);
  std::string tok;
  bool first = true;
  while (std::getline(ss, tok, ':')) {
    if (first) {
      out.kind = potential_kind_from_string(tok);
      first = false;
      continue;
    }
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("bad potential spec field: " + tok);
    }
    const std::string key = tok.substr(0, eq);
    const double val = std::stod(tok.substr(eq + 1));
    if (key == "eta") {
      out.eta = val;
    } else if (key == "eps") {
      out.eps_quad = val;
    } else {
      throw std::invalid_argument("unknown potential spec key: " + key);
    }
  }
  if (first) throw std::invalid_argument("empty potential spec");
  if (out.eta <= 0) throw std::invalid_argument("eta must be > 0");
  return out;
}

PotentialPtr parse_potential_spec(const std::string& spec,
                                  const std::vector<int>& shapes) {
  const ParsedPotentialSpec f = parse_potential_fields(spec);
  return layer_scaled(f.kind, f.eta, shapes, f.eps_quad);
}

Vec sample_in_domain(const Potential& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int m = p.dimension();
  const double r = p.domain_radius();
  const double box = std::isfinite(r) ? 0.8 * r : 2.0;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec w(m);
    for (int i = 0; i < m; ++i) w[i] = box * unit(rng);
    if (p.in_domain(w)) return w;
  }
  throw std::runtime_error("could not sample an in-domain point");
}

AssumptionReport check_assumptions(const Potential& p, const SampleSpec& samples) {
  AssumptionReport rep;
  std::mt19937_64 rng(samples.seed);
  const int m = p.dimension();
  const double r = p.domain_radius();
  const bool bounded = std::isfinite(r);

  // A5: phi(0) = 0, grad phi(0) = 0.
  {
    const Vec zero = Vec::Zero(m);
    if (std::abs(p.value(zero)) > 1e-14 || p.gradient(zero).norm() > 1e-14) {
      rep.a5 = {false, "phi(0) or grad phi(0) nonzero"};
    }
  }

  // A3: positive definite Hessian at in-domain samples (and at the origin).
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(p.hessian(Vec::Zero(m)));
    if (es.eigenvalues().minCoeff() <= 0.0) {
      rep.a3 = {false, "Hessian not PD at w = 0"};
    } else {
      for (int i = 0; i < samples.n_points && rep.a3.pass; ++i) {
        const Vec w = sample_in_domain(p, rng);
        Eigen::SelfAdjointEigenSolver<Mat> es2(p.hessian(w));
        if (es2.eigenvalues().minCoeff() <= 0.0) {
          std::ostringstream os;
          os << "Hessian not PD at sample |w| = " << w.norm();
          rep.a3 = {false, os.str()};
        }
      }
    }
  }

  // A1/A2: open domain with essential smoothness. For bounded domains the
  // value and the gradient norm must blow up along boundary approaches; for
  // unbounded kinds both hold by construction (checked via monotone growth).
  if (bounded) {
    Vec dir = Vec::Ones(m);
    if (!p.domain_is_per_coordinate()) dir /= dir.norm();
    double prev_v = -kInf, prev_g = -kInf;
    bool mono = true;
    for (int k = 1; k <= samples.n_boundary; ++k) {
      const double t = 1.0 - std::pow(10.0, -0.5 * k);
      const Vec w = t * r * dir;
      const double v = p.value(w);
      const double g = p.gradient(w).norm();
      if (!(v > prev_v && g > prev_g)) mono = false;
      prev_v = v;
      prev_g = g;
    }
    if (!mono || prev_v < 10.0 || prev_g < 10.0) {
      rep.a2 = {false, "no blow-up along boundary approach"};
      rep.a1 = {false, "essential smoothness not observed at the boundary"};
    }
  }

  // A4: super-coercivity phi(t d)/||t d|| increasing without bound; vacuous
  // via boundary blow-up for bounded domains.
  if (!bounded) {
    Vec dir = Vec::Ones(m);
    dir /= dir.norm();
    double prev = -kInf;
    bool mono = true;
    double last = 0;
    for (int k = 0; k < samples.n_ray_steps; ++k) {
      const double t = std::pow(2.0, k);
      last = p.value(t * dir) / t;
      if (last <= prev) mono = false;
      prev = last;
    }
    if (!mono || last < 100.0) {
      rep.a4 = {false, "phi(t d)/t not increasing without bound"};
    }
  }

  return rep;
}

}  // namespace aniso
