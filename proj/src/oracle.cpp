#include "aniso/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace aniso {

GridSpec GridSpec::uniform(double lo_, double hi_, int n, int dim,
                           int refine_levels_) {
  GridSpec g;
  g.lo = Vec::Constant(dim, lo_);
  g.hi = Vec::Constant(dim, hi_);
  g.points.assign(dim, n);
  g.refine_levels = refine_levels_;
  return g;
}

void GridSpec::validate() const {
  const int d = static_cast<int>(points.size());
  if (d < 1 || d > 3) throw std::invalid_argument("grid supports 1..3 dimensions");
  if (lo.size() != d || hi.size() != d) {
    throw std::invalid_argument("grid bounds do not match dimension");
  }
  long total = 1;
  for (int i = 0; i < d; ++i) {
    if (points[i] < 3) throw std::invalid_argument("grid needs >= 3 points per dim");
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] >= hi[i]) {
      throw std::invalid_argument("grid bounds must be finite with lo < hi");
    }
    total *= points[i];
  }
  long per_level = total;
  for (int l = 0; l < refine_levels; ++l) total += per_level;
  if (total > 10'000'000L) throw std::invalid_argument("grid exceeds the 1e7 desk-scale cap");
}

long GridSpec::total_points() const {
  long total = 1;
  for (int n : points) total *= n;
  return total;
}

Vec finite_diff_gradient(const ScalarField& fn, const Vec& x, double h) {
  const int d = static_cast<int>(x.size());
  Vec g(d);
  for (int i = 0; i < d; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fp = fn(xp), fm = fn(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw StencilError("infinite value on finite-difference stencil");
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

namespace {

// Scans one rectangular grid, updating the incumbent minimum and the tie set.
void scan_grid(const ScalarField& fn, const Vec& lo, const Vec& hi,
               const std::vector<int>& points, double tie_tol, double& best,
               std::vector<Vec>& ties) {
  const int d = static_cast<int>(points.size());
  std::vector<int> idx(d, 0);
  Vec x(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      x[i] = points[i] == 1 ? lo[i]
                            : lo[i] + (hi[i] - lo[i]) * idx[i] / (points[i] - 1);
    }
    const double v = fn(x);
    if (std::isfinite(v)) {
      if (v < best - tie_tol) {
        best = v;
        ties.clear();
        ties.push_back(x);
      } else if (v <= best + tie_tol) {
        if (v < best) best = v;
        ties.push_back(x);
      }
    }
    int i = d - 1;
    while (i >= 0 && ++idx[i] == points[i]) idx[i--] = 0;
    if (i < 0) break;
  }
}

void dedupe_sorted(std::vector<Vec>& pts, double tol) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    for (int i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  });
  std::vector<Vec> out;
  for (const Vec& p : pts) {
    if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
  }
  pts = std::move(out);
}

}  // namespace

GridResult grid_argmin(const ScalarField& fn, const GridSpec& grid) {
  grid.validate();
  double best = kInf;
  std::vector<Vec> ties;
  scan_grid(fn, grid.lo, grid.hi, grid.points, grid.tie_tol, best, ties);
  if (!std::isfinite(best)) {
    throw EmptyFeasibleError("all grid values are +inf");
  }

  const int d = static_cast<int>(grid.points.size());
  Vec cell(d);
  for (int i = 0; i < d; ++i) cell[i] = (grid.hi[i] - grid.lo[i]) / (grid.points[i] - 1);

  Vec range = grid.hi - grid.lo;
  for (int level = 0; level < grid.refine_levels; ++level) {
    range /= 10.0;
    std::vector<Vec> candidates = ties;
    dedupe_sorted(candidates, cell.norm());
    for (const Vec& c : candidates) {
      // Centered on the candidate with odd point counts so the incumbent
      // stays on the refined grid.
      Vec lo(d), hi(d);
      std::vector<int> pts(d);
      for (int i = 0; i < d; ++i) {
        lo[i] = c[i] - 0.5 * range[i];
        hi[i] = c[i] + 0.5 * range[i];
        pts[i] = grid.points[i] | 1;
      }
      scan_grid(fn, lo, hi, pts, grid.tie_tol, best, ties);
    }
    for (int i = 0; i < d; ++i) cell[i] = range[i] / (grid.points[i] - 1);
  }

  // Final tie filter against the final minimum.
  std::vector<Vec> argmins;
  for (const Vec& p : ties) {
    if (fn(p) <= best + grid.tie_tol) argmins.push_back(p);
  }
  // Points found at coarse levels that refined levels improved upon sit in
  // different basins only if their value still matches the minimum.
  dedupe_sorted(argmins, 0.5 * cell.norm());
  return {std::move(argmins), best};
}

ConvexityConstants local_convexity_constants(const Potential& p, const Vec& k_lo,
                                             const Vec& k_hi, int n_samples,
                                             unsigned seed) {
  const int d = p.dimension();
  if (k_lo.size() != d || k_hi.size() != d) {
    throw std::invalid_argument("box dimension mismatch");
  }
  if (!p.in_domain(k_lo) || !p.in_domain(k_hi)) {
    throw std::invalid_argument("box K is not contained in dom phi");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ConvexityConstants out{kInf, 0.0};
  for (int s = 0; s < n_samples; ++s) {
    Vec w(d);
    for (int i = 0; i < d; ++i) w[i] = k_lo[i] + (k_hi[i] - k_lo[i]) * u(rng);
    if (!p.in_domain(w)) throw std::invalid_argument("box K intersects domain complement");
    Eigen::SelfAdjointEigenSolver<Mat> es(p.hessian(w));
    out.mu_hat = std::min(out.mu_hat, es.eigenvalues().minCoeff());
    out.gamma_hat = std::max(out.gamma_hat, es.eigenvalues().maxCoeff());
  }
  // Include the corners and center.
  for (const Vec& w : {k_lo, k_hi, Vec(0.5 * (k_lo + k_hi))}) {
    Eigen::SelfAdjointEigenSolver<Mat> es(p.hessian(w));
    out.mu_hat = std::min(out.mu_hat, es.eigenvalues().minCoeff());
    out.gamma_hat = std::max(out.gamma_hat, es.eigenvalues().maxCoeff());
  }
  return out;
}

}  // namespace aniso
