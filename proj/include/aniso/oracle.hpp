#pragma once

#include "aniso/potentials.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace aniso {

using ScalarField = std::function<double(const Vec&)>;

/// Dense rectangular grid over <= 3 dimensions with optional refinement
/// around each candidate minimizer.
struct GridSpec {
  Vec lo;
  Vec hi;
  std::vector<int> points;   // per-dimension counts, each >= 3
  int refine_levels = 2;     // re-grid shrink factor 10 per level
  double tie_tol = 1e-12;    // absolute tie threshold for multivalued argmins

  static GridSpec uniform(double lo, double hi, int n, int dim = 1,
                          int refine_levels = 2);
  void validate() const;
  long total_points() const;
};

struct GridResult {
  std::vector<Vec> argmins;  // all points within tie_tol of the minimum
  double min_value = kInf;
};

struct StencilError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyFeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Central finite differences per coordinate; throws StencilError when a
/// stencil value is infinite (caller shrinks h).
Vec finite_diff_gradient(const ScalarField& fn, const Vec& x, double h);

/// Brute-force global minimization over the (refined) grid. Throws
/// EmptyFeasibleError when every grid value is +inf. Deterministic:
/// lexicographic scan order, candidates kept sorted.
GridResult grid_argmin(const ScalarField& fn, const GridSpec& grid);

struct ConvexityConstants {
  double mu_hat = 0.0;     // min sampled Hessian eigenvalue over K
  double gamma_hat = 0.0;  // max sampled Hessian eigenvalue over K
  bool admissible() const { return mu_hat > 0.0; }
};

/// Empirical local strong convexity / Lipschitz gradient constants of a
/// potential over a box K (must lie inside dom phi).
ConvexityConstants local_convexity_constants(const Potential& p, const Vec& k_lo,
                                             const Vec& k_hi, int n_samples,
                                             unsigned seed = 11);

}  // namespace aniso
