#pragma once

#include "aniso/models.hpp"
#include "aniso/oracle.hpp"
#include "aniso/potentials.hpp"

#include <optional>

namespace aniso {

/// A scalar objective with optional smoothness; the adapter for both the
/// test-function corpus and model losses.
struct Objective {
  int dimension = 1;
  double lower_bound = -kInf;
  bool smooth = true;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // required when smooth
};

Objective objective_from(const TestFunction& f);

struct ProxProblem {
  Objective f;
  PotentialPtr phi;
  double lambda = 1.0;

  /// lambda_f is non-constructive when f is unbounded below.
  bool threshold_unknown() const { return !(f.lower_bound > -kInf); }
  /// f(z) + (1/lambda) phi(v - z); +inf outside dom f + dom phi in z.
  double inner(const Vec& v, const Vec& z) const;
  Vec inner_gradient(const Vec& v, const Vec& z) const;
};

ProxProblem make_prox_problem(const TestFunction& f, PotentialPtr phi, double lambda);

enum class ProxMethod { grid_oracle, local_newton };

struct ProxResult {
  std::vector<Vec> minimizers;
  double envelope = kInf;
  std::optional<Vec> envelope_gradient;  // present for unique in-domain prox
  bool multivalued = false;
  ProxMethod method = ProxMethod::grid_oracle;
};

/// Global minimization of the inner problem over a refined grid; throws
/// EmptyFeasibleError outside dom f + dom phi.
ProxResult prox_grid(const ProxProblem& prob, const Vec& v, const GridSpec& grid);

struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Monotone descent on the inner problem from init (default v, feasible by
/// phi(0)=0 on the open domain) until the inner gradient norm is <= 1e-10.
/// Requires smooth f.
ProxResult prox_local(const ProxProblem& prob, const Vec& v,
                      std::optional<Vec> init = std::nullopt,
                      double tol = 1e-10, int max_iter = 10000);

/// (1/lambda) grad phi(v - z): the envelope gradient formula.
Vec envelope_gradient(const ProxProblem& prob, const Vec& v, const Vec& z);

/// Norm of the envelope gradient at u, using the chosen prox method.
double stationarity_measure(const ProxProblem& prob, const Vec& u,
                            ProxMethod method, const GridSpec* grid = nullptr);

/// Newton solve of z + grad phi*(lambda grad f(z)) = v started at the
/// prox_local solution; returns the distance between the two solutions.
double prox_identity_residual(const ProxProblem& prob, const Vec& v);

/// Minimum grid-oracle envelope over sampled v in the eps-ball around
/// v_bar (evidence for the uniform lower bound in phi-prox-boundedness).
double prox_bound_certificate(const ProxProblem& prob, const Vec& v_bar, double eps,
                              const GridSpec& z_grid, int samples_per_dim = 9);

}  // namespace aniso
