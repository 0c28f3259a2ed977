#include "aniso/splitting.hpp"

#include <algorithm>
#include <cmath>

namespace aniso {

Mat stacked_identity(int n, int copies) {
  Mat a = Mat::Zero(n * copies, n);
  for (int j = 0; j < copies; ++j) {
    a.block(j * n, 0, n, n) = Mat::Identity(n, n);
  }
  return a;
}

double objective(const SplittingProblem& prob, const SplittingState& s) {
  const Vec w = prob.a * s.u - s.z;
  if (!prob.phi->in_domain(w)) return kInf;
  const double fz = prob.f.value(s.z);
  if (!std::isfinite(fz)) return kInf;
  double val = fz + prob.phi->value(w) / prob.lambda;
  if (prob.g) val += prob.g->value(s.u);
  return val;
}

namespace {

Vec coupling_gradient_u(const SplittingProblem& prob, const SplittingState& s) {
  return prob.a.transpose() * prob.phi->gradient(prob.a * s.u - s.z) / prob.lambda;
}

Vec grad_g(const SplittingProblem& prob, const Vec& u) {
  return prob.g ? prob.g->gradient(u) : Vec::Zero(u.size()).eval();
}

}  // namespace

StationarityResiduals residuals(const SplittingProblem& prob, const SplittingState& s,
                                bool with_envelope) {
  const Vec w = prob.a * s.u - s.z;
  if (!prob.phi->in_domain(w)) {
    throw std::domain_error("residuals: Au - z outside dom phi");
  }
  const Vec gp = prob.phi->gradient(w) / prob.lambda;
  StationarityResiduals out;
  out.r_u = (prob.a.transpose() * gp + grad_g(prob, s.u)).norm();
  if (prob.f.smooth) {
    out.r_z = (prob.f.gradient(s.z) - gp).norm();
  }
  if (with_envelope && prob.f.smooth) {
    ProxProblem pp{prob.f, prob.phi, prob.lambda};
    const Vec au = prob.a * s.u;
    ProxResult pr = prox_local(pp, au, s.z);
    out.envelope_residual =
        (prob.a.transpose() * (*pr.envelope_gradient) + grad_g(prob, s.u)).norm();
  }
  return out;
}

double feasibility_line_search(const SplittingProblem& prob, const SplittingState& s,
                               Block block, const Vec& direction, double step0) {
  const double f0 = objective(prob, s);
  if (!std::isfinite(f0)) {
    throw std::domain_error("line search requires a feasible current state");
  }
  double step = step0;
  for (int k = 0; k <= 50; ++k) {
    SplittingState trial = s;
    if (block == Block::u) {
      trial.u += step * direction;
    } else {
      trial.z += step * direction;
    }
    const double ft = objective(prob, trial);
    if (std::isfinite(ft) && ft <= f0) return step;
    step *= 0.5;
  }
  throw LineSearchError("feasibility line search exhausted 50 halvings");
}

Vec u_gradient_step(const SplittingProblem& prob, const SplittingState& s, double tau) {
  Vec grad = coupling_gradient_u(prob, s) + grad_g(prob, s.u);
  if (prob.tau_includes_inv_lambda) {
    // Alternate scaling convention: tau absorbs the 1/lambda factor.
    grad = prob.a.transpose() * prob.phi->gradient(prob.a * s.u - s.z) +
           grad_g(prob, s.u);
  }
  if (grad.norm() == 0.0) return s.u;
  const Vec dir = -grad;
  const double step = feasibility_line_search(prob, s, Block::u, dir, tau);
  return s.u + step * dir;
}

Vec z_gradient_step(const SplittingProblem& prob, const SplittingState& s, double sigma) {
  if (!prob.f.smooth) throw std::invalid_argument("z step requires smooth f");
  const Vec grad =
      prob.f.gradient(s.z) - prob.phi->gradient(prob.a * s.u - s.z) / prob.lambda;
  if (grad.norm() == 0.0) return s.z;
  const Vec dir = -grad;
  const double step = feasibility_line_search(prob, s, Block::z, dir, sigma);
  return s.z + step * dir;
}

Vec u_median(const std::vector<Vec>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("u_median needs >= 1 block");
  const int n = static_cast<int>(blocks.front().size());
  Vec med(n);
  std::vector<double> vals(blocks.size());
  for (int i = 0; i < n; ++i) {
    for (size_t j = 0; j < blocks.size(); ++j) vals[j] = blocks[j][i];
    std::sort(vals.begin(), vals.end());
    med[i] = vals[(vals.size() - 1) / 2];  // lower median for even M
  }
  return med;
}

Vec u_exact_min(const SplittingProblem& prob, const SplittingState& s) {
  // Newton on the u-gradient of F; one step is exact in the quadratic case.
  Vec u = s.u;
  for (int it = 0; it < 100; ++it) {
    SplittingState cur{u, s.z};
    const Vec grad = coupling_gradient_u(prob, cur) + grad_g(prob, u);
    if (grad.norm() <= 1e-12) return u;
    const Mat h_phi = prob.phi->hessian(prob.a * u - s.z) / prob.lambda;
    Mat h = prob.a.transpose() * h_phi * prob.a;
    if (prob.g) {
      // g is zero or quadratic; its Hessian is constant, via finite
      // differences of the gradient at u.
      const double step = 1e-5;
      for (int i = 0; i < h.cols(); ++i) {
        Vec up = u, um = u;
        up[i] += step;
        um[i] -= step;
        h.col(i) += (prob.g->gradient(up) - prob.g->gradient(um)) / (2.0 * step);
      }
    }
    Vec d = h.ldlt().solve(-grad);
    double alpha = 1.0;
    bool ok = false;
    const double f0 = objective(prob, cur);
    for (int k = 0; k < 60; ++k) {
      SplittingState trial{u + alpha * d, s.z};
      const double ft = objective(prob, trial);
      if (std::isfinite(ft) && ft <= f0) {
        u += alpha * d;
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) break;
  }
  return u;
}

std::pair<SplittingState, RunRecord> alternate_min(const SplittingProblem& prob,
                                                   SplittingState s,
                                                   const AltMinOptions& opts) {
  RunRecord rec;
  rec.columns = {"iter", "F", "r_u", "r_z", "envelope_residual", "step_u", "step_z"};
  for (int it = 0; it < opts.max_iter; ++it) {
    double step_u = 0.0, step_z = 0.0;
    if (opts.exact_u) {
      s.u = u_exact_min(prob, s);
    } else {
      const Vec u_before = s.u;
      s.u = u_gradient_step(prob, s, opts.tau);
      step_u = (s.u - u_before).norm();
    }
    {
      const Vec z_before = s.z;
      s.z = z_gradient_step(prob, s, opts.sigma);
      step_z = (s.z - z_before).norm();
    }
    const bool want_env = opts.envelope_every > 0 && (it % opts.envelope_every == 0);
    StationarityResiduals r = residuals(prob, s, want_env);
    rec.add_row({static_cast<double>(it), objective(prob, s), r.r_u, r.r_z,
                 r.envelope_residual, step_u, step_z});
    if (std::max(r.r_u, r.r_z) <= opts.tol) break;
  }
  return {std::move(s), std::move(rec)};
}

}  // namespace aniso
