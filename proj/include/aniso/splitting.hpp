#pragma once

#include "aniso/prox.hpp"
#include "aniso/run_record.hpp"

namespace aniso {

/// F(u, z) = f(z) + (1/lambda) phi(Au - z) + g(u), with g zero or quadratic.
struct SplittingProblem {
  Objective f;                    // on R^m
  std::optional<Objective> g;     // on R^n; absent means g = 0
  Mat a;                          // m x n coupling matrix
  PotentialPtr phi;               // on R^m
  double lambda = 1.0;
  /// When true the u-step omits the 1/lambda factor on the coupling
  /// gradient, i.e. 1/lambda is absorbed into tau.
  bool tau_includes_inv_lambda = false;

  int n() const { return static_cast<int>(a.cols()); }
  int m() const { return static_cast<int>(a.rows()); }
};

/// A = [I, ..., I]^T stacking M identity blocks of size n.
Mat stacked_identity(int n, int copies);

struct SplittingState {
  Vec u;
  Vec z;
};

struct StationarityResiduals {
  double r_u = 0.0;  // |(1/lambda) A^T grad phi(Au - z) + grad g(u)|
  double r_z = 0.0;  // |grad f(z) - (1/lambda) grad phi(Au - z)|
  std::optional<double> envelope_residual;  // |A^T grad e(Au) + grad g(u)|
};

struct LineSearchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double objective(const SplittingProblem& prob, const SplittingState& s);

StationarityResiduals residuals(const SplittingProblem& prob, const SplittingState& s,
                                bool with_envelope = false);

enum class Block { u, z };

/// Largest step in {step0 * 2^-k, k = 0..50} keeping F finite and
/// non-increasing on the trial point; throws LineSearchError when exhausted.
double feasibility_line_search(const SplittingProblem& prob, const SplittingState& s,
                               Block block, const Vec& direction, double step0);

Vec u_gradient_step(const SplittingProblem& prob, const SplittingState& s, double tau);
Vec z_gradient_step(const SplittingProblem& prob, const SplittingState& s, double sigma);

/// Componentwise lower median of the worker blocks: the robust aggregate
/// matching an l1-type coupling.
Vec u_median(const std::vector<Vec>& blocks);

/// Exact minimization of F(., z) in u: closed form for quad phi with g
/// zero/quadratic, damped Newton otherwise.
Vec u_exact_min(const SplittingProblem& prob, const SplittingState& s);

struct AltMinOptions {
  double tau = 0.1;
  double sigma = 0.1;
  double tol = 1e-8;
  int max_iter = 10000;
  bool exact_u = false;
  /// Compute the envelope residual every k iterations (0 = never).
  int envelope_every = 0;
};

std::pair<SplittingState, RunRecord> alternate_min(const SplittingProblem& prob,
                                                   SplittingState s,
                                                   const AltMinOptions& opts);

}  // namespace aniso
