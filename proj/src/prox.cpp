#include "aniso/prox.hpp"

#include <cmath>

namespace aniso {

Objective objective_from(const TestFunction& f) {
  Objective o;
  o.dimension = f.dimension;
  o.lower_bound = f.lower_bound;
  o.smooth = f.smooth;
  o.value = f.value;
  o.gradient = f.grad;
  return o;
}

ProxProblem make_prox_problem(const TestFunction& f, PotentialPtr phi, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be > 0");
  if (phi->dimension() != f.dimension) {
    throw std::invalid_argument("potential/function dimension mismatch");
  }
  return ProxProblem{objective_from(f), std::move(phi), lambda};
}

double ProxProblem::inner(const Vec& v, const Vec& z) const {
  const Vec w = v - z;
  if (!phi->in_domain(w)) return kInf;
  const double fz = f.value(z);
  if (!std::isfinite(fz)) return kInf;
  return fz + phi->value(w) / lambda;
}

Vec ProxProblem::inner_gradient(const Vec& v, const Vec& z) const {
  return f.gradient(z) - phi->gradient(v - z) / lambda;
}

ProxResult prox_grid(const ProxProblem& prob, const Vec& v, const GridSpec& grid) {
  const auto fn = [&](const Vec& z) { return prob.inner(v, z); };
  GridResult gr = grid_argmin(fn, grid);
  ProxResult out;
  out.method = ProxMethod::grid_oracle;
  out.minimizers = std::move(gr.argmins);
  out.envelope = gr.min_value;
  out.multivalued = out.minimizers.size() > 1;
  if (!out.multivalued && prob.phi->in_domain(v - out.minimizers.front())) {
    out.envelope_gradient = prob.phi->gradient(v - out.minimizers.front()) / prob.lambda;
  }
  return out;
}

ProxResult prox_local(const ProxProblem& prob, const Vec& v, std::optional<Vec> init,
                      double tol, int max_iter) {
  if (!prob.f.smooth) {
    throw std::invalid_argument("prox_local requires a smooth objective");
  }
  Vec z = init.value_or(v);
  if (!prob.phi->in_domain(v - z) || !std::isfinite(prob.f.value(z))) {
    throw std::invalid_argument("prox_local init is infeasible");
  }
  double h = prob.inner(v, z);
  Vec g = prob.inner_gradient(v, z);
  double step = prob.lambda;  // initial trial scale; adapted by Barzilai-Borwein
  Vec z_prev, g_prev;
  bool have_prev = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    if (g.norm() <= tol) break;
    if (have_prev) {
      const Vec s = z - z_prev;
      const Vec y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 0) step = s.squaredNorm() / sy;
    }
    step = std::min(std::max(step, 1e-12), 1e6);
    bool accepted = false;
    double alpha = step;
    for (int k = 0; k < 60; ++k) {
      const Vec trial = z - alpha * g;
      const double ht = prob.inner(v, trial);
      if (std::isfinite(ht) && ht <= h) {
        z_prev = z;
        g_prev = g;
        have_prev = true;
        z = trial;
        h = ht;
        g = prob.inner_gradient(v, z);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted || (have_prev && (z - z_prev).norm() == 0.0)) {
      break;  // objective at its floating-point floor; polish on the gradient
    }
  }
  // Newton polish: near the minimizer the objective value stagnates at
  // machine precision long before |g| reaches tol, so accept on gradient
  // decrease instead.
  const int d = static_cast<int>(z.size());
  for (int it = 0; it < 100 && g.norm() > tol; ++it) {
    Mat jac(d, d);
    const double hh = 1e-7;
    bool stencil_ok = true;
    for (int i = 0; i < d && stencil_ok; ++i) {
      Vec zp = z, zm = z;
      zp[i] += hh;
      zm[i] -= hh;
      if (!prob.phi->in_domain(v - zp) || !prob.phi->in_domain(v - zm)) {
        stencil_ok = false;
        break;
      }
      jac.col(i) = (prob.inner_gradient(v, zp) - prob.inner_gradient(v, zm)) /
                   (2.0 * hh);
    }
    if (!stencil_ok) break;
    const Vec dz = jac.fullPivLu().solve(-g);
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      const Vec trial = z + alpha * dz;
      if (prob.phi->in_domain(v - trial) && std::isfinite(prob.f.value(trial))) {
        const Vec gt = prob.inner_gradient(v, trial);
        if (gt.norm() < g.norm()) {
          z = trial;
          g = gt;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  h = prob.inner(v, z);
  if (g.norm() > tol) {
    throw NonConvergenceError("prox_local did not converge, |grad| = " +
                              std::to_string(g.norm()));
  }
  ProxResult out;
  out.method = ProxMethod::local_newton;
  out.minimizers = {z};
  out.envelope = h;
  out.envelope_gradient = prob.phi->gradient(v - z) / prob.lambda;
  out.multivalued = false;
  return out;
}

Vec envelope_gradient(const ProxProblem& prob, const Vec& v, const Vec& z) {
  const Vec w = v - z;
  if (!prob.phi->in_domain(w)) {
    throw std::domain_error("v - z outside dom phi");
  }
  return prob.phi->gradient(w) / prob.lambda;
}

double stationarity_measure(const ProxProblem& prob, const Vec& u, ProxMethod method,
                            const GridSpec* grid) {
  if (method == ProxMethod::local_newton) {
    return prox_local(prob, u).envelope_gradient->norm();
  }
  if (grid == nullptr) throw std::invalid_argument("grid oracle needs a GridSpec");
  ProxResult r = prox_grid(prob, u, *grid);
  return envelope_gradient(prob, u, r.minimizers.front()).norm();
}

double prox_identity_residual(const ProxProblem& prob, const Vec& v) {
  if (!prob.f.smooth) {
    throw std::invalid_argument("prox identity requires smooth f");
  }
  const ProxResult local = prox_local(prob, v);
  const Vec z0 = local.minimizers.front();
  const int d = static_cast<int>(v.size());
  const auto residual = [&](const Vec& z) -> Vec {
    return z + prob.phi->inverse_gradient(prob.lambda * prob.f.gradient(z)) - v;
  };
  Vec z = z0;
  Vec r = residual(z);
  for (int it = 0; it < 100 && r.norm() > 1e-12; ++it) {
    // Finite-difference Jacobian; the problems are 1-D/2-D.
    Mat jac(d, d);
    const double h = 1e-7;
    for (int i = 0; i < d; ++i) {
      Vec zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      jac.col(i) = (residual(zp) - residual(zm)) / (2.0 * h);
    }
    Vec dz = jac.fullPivLu().solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      const Vec trial = z + alpha * dz;
      const Vec rt = residual(trial);
      if (rt.norm() < r.norm()) {
        z = trial;
        r = rt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  if (r.norm() > 1e-10) {
    throw InversionError("prox identity Newton did not converge");
  }
  return (z - z0).norm();
}

double prox_bound_certificate(const ProxProblem& prob, const Vec& v_bar, double eps,
                              const GridSpec& z_grid, int samples_per_dim) {
  const int d = static_cast<int>(v_bar.size());
  std::vector<int> idx(d, 0);
  double beta = kInf;
  bool any = false;
  while (true) {
    Vec v(d);
    for (int i = 0; i < d; ++i) {
      v[i] = v_bar[i] - eps + 2.0 * eps * idx[i] / (samples_per_dim - 1);
    }
    if ((v - v_bar).norm() <= eps) {
      try {
        beta = std::min(beta, prox_grid(prob, v, z_grid).envelope);
        any = true;
      } catch (const EmptyFeasibleError&) {
        // v outside dom f + dom phi; not evidence either way
      }
    }
    int i = d - 1;
    while (i >= 0 && ++idx[i] == samples_per_dim) idx[i--] = 0;
    if (i < 0) break;
  }
  if (!any) {
    throw EmptyFeasibleError("no sampled v inside dom f + dom phi");
  }
  return beta;
}

}  // namespace aniso
