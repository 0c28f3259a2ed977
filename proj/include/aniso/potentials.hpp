#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class PotentialKind { quad, cubic, tan, tan_sep, log, log_sep };

PotentialKind potential_kind_from_string(const std::string& s);
std::string to_string(PotentialKind k);

/// A Legendre penalty function phi with value/gradient/Hessian calculus and
/// an open (possibly bounded) domain. Immutable after construction; all
/// operations are pure.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int dimension() const = 0;
  virtual bool in_domain(const Vec& w) const = 0;

  /// +inf outside the domain, never NaN.
  virtual double value(const Vec& w) const = 0;
  /// Throws std::domain_error outside dom phi.
  virtual Vec gradient(const Vec& w) const = 0;
  virtual Mat hessian(const Vec& w) const = 0;

  /// Solves grad phi(w) = y for w, i.e. evaluates grad phi* (the gradient
  /// bijects the domain interiors). Throws InversionError on
  /// non-convergence.
  virtual Vec inverse_gradient(const Vec& y) const = 0;

  /// Euclidean (or per-coordinate, see domain_is_per_coordinate) bound of
  /// each block of the domain; +inf for unbounded kinds.
  virtual double domain_radius() const = 0;
  virtual bool domain_is_per_coordinate() const = 0;

  /// True when the Hessian is positive definite everywhere on the interior
  /// (pure cubic with eps_quad = 0 is the flagged exception).
  virtual bool admissible() const = 0;

  virtual std::string describe() const = 0;

  /// Bregman distance phi(w') - phi(w) - <grad phi(w), w' - w>;
  /// +inf when w is not interior or w' is outside dom phi.
  double bregman(const Vec& w_prime, const Vec& w) const;
};

using PotentialPtr = std::shared_ptr<const Potential>;

/// One base penalty kind acting on R^m as a whole (quad, cubic, tan,
/// tan-sep, log, log-sep).
class BasePotential final : public Potential {
 public:
  BasePotential(PotentialKind kind, int dimension, double eps_quad = 0.0,
                double quad_coeff = 0.5);

  int dimension() const override { return dim_; }
  bool in_domain(const Vec& w) const override;
  double value(const Vec& w) const override;
  Vec gradient(const Vec& w) const override;
  Mat hessian(const Vec& w) const override;
  Vec inverse_gradient(const Vec& y) const override;
  double domain_radius() const override;
  bool domain_is_per_coordinate() const override;
  bool admissible() const override;
  std::string describe() const override;

  PotentialKind kind() const { return kind_; }
  double eps_quad() const { return eps_quad_; }
  double quad_coeff() const { return quad_coeff_; }

 private:
  void require_dim(const Vec& w) const;
  void require_domain(const Vec& w) const;

  PotentialKind kind_;
  int dim_;
  double eps_quad_;
  double quad_coeff_;  // quad is coeff*||w||^2; 0.5 is the default convention
};

/// Blockwise sum phi(w) = sum_l base(w_l / eta) over the given block sizes.
/// Covers both the separable-over-copies construction and the layer-scaled
/// penalty; eta = 1 with equal blocks recovers plain separability.
class BlockPotential final : public Potential {
 public:
  BlockPotential(PotentialKind kind, std::vector<int> block_sizes, double eta,
                 double eps_quad = 0.0, double quad_coeff = 0.5);

  int dimension() const override { return dim_; }
  bool in_domain(const Vec& w) const override;
  double value(const Vec& w) const override;
  Vec gradient(const Vec& w) const override;
  Mat hessian(const Vec& w) const override;
  Vec inverse_gradient(const Vec& y) const override;
  double domain_radius() const override;
  bool domain_is_per_coordinate() const override;
  bool admissible() const override;
  std::string describe() const override;

  double eta() const { return eta_; }
  const std::vector<int>& block_sizes() const { return sizes_; }

 private:
  std::vector<BasePotential> blocks_;
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  double eta_;
  int dim_;
};

/// M identical copies of the base acting block-diagonally (sec. "separable
/// over the copies").
PotentialPtr separable(const BasePotential& base, int copies);

/// phi_hat(w) = sum_l base(w_l / eta) with one block per layer shape.
PotentialPtr layer_scaled(PotentialKind kind, double eta,
                          const std::vector<int>& shapes,
                          double eps_quad = 0.0, double quad_coeff = 0.5);

/// Parses "<kind>[:eta=<float>][:eps=<float>]", e.g. "log-sep:eta=2.0".
/// The shapes argument supplies the block layout; a single block of size
/// `dim` gives the plain potential.
PotentialPtr parse_potential_spec(const std::string& spec,
                                  const std::vector<int>& shapes);

struct ParsedPotentialSpec {
  PotentialKind kind;
  double eta = 1.0;
  double eps_quad = 0.0;
};
ParsedPotentialSpec parse_potential_fields(const std::string& spec);

struct SampleSpec {
  int n_points = 100;
  unsigned seed = 7;
  int n_boundary = 12;   // points per boundary-approach sequence
  int n_ray_steps = 10;  // geometric t-samples per coercivity ray
};

struct AssumptionCheck {
  bool pass = true;
  std::string witness;  // empty when pass
};

struct AssumptionReport {
  AssumptionCheck a1, a2, a3, a4, a5;
  bool all_pass() const {
    return a1.pass && a2.pass && a3.pass && a4.pass && a5.pass;
  }
};

/// Empirical pass/fail per assumption (A1)-(A5) with witnesses for failures.
AssumptionReport check_assumptions(const Potential& p, const SampleSpec& samples);

/// Deterministic in-domain sample, uniform in a box scaled to 0.8 of the
/// domain radius (or [-2,2]^m for unbounded kinds).
Vec sample_in_domain(const Potential& p, std::mt19937_64& rng);

struct InversionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aniso
