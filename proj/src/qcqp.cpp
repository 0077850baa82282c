#include "dfrc/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dfrc {

namespace {

double real_inner(const MatC& a, const MatC& b) {
  return std::real((a.array().conjugate() * b.array()).sum());
}

// Hessian core W = base + sum_i coef_i * scale_i * h_i h_i^H + identity_coef*I.
MatC hessian_core(const MatC& base, const std::vector<QoSQuadratic>& cons,
                  const std::vector<double>& coef, double identity_coef) {
  MatC w = base;
  w.diagonal().array() += identity_coef;
  for (size_t i = 0; i < cons.size(); ++i) {
    const double c = coef[i] * cons[i].core_scale;
    if (c != 0.0) w.noalias() += c * (cons[i].h * cons[i].h.adjoint());
  }
  return 0.5 * (w + w.adjoint());
}

constexpr double kSigma = 0.1;  // barrier parameter reduction per outer stage

}  // namespace

QcqpSolution solve(const QcqpProblem& problem, const QcqpOptions& opts) {
  const auto& cons = problem.constraints;
  const int mq = static_cast<int>(cons.size());
  const int m = mq + 1;  // power ball last
  const double p = problem.power;
  const double scale = std::max(1.0, problem.objective.q_lin.norm());

  QcqpSolution sol;
  sol.multipliers.assign(m, 0.0);

  auto values = [&](const MatC& t, std::vector<double>& f) {
    for (int i = 0; i < mq; ++i) f[i] = cons[i].value(t);
    f[mq] = t.squaredNorm() - p;
  };
  auto strictly_interior = [&](const MatC& t) {
    std::vector<double> f(m);
    values(t, f);
    for (double v : f)
      if (!(v < 0.0)) return false;
    return true;
  };

  // Starting point: blend the warm start toward a strictly interior anchor.
  MatC anchor;
  bool have_anchor = false;
  if (opts.anchor && strictly_interior(*opts.anchor)) {
    anchor = *opts.anchor;
    have_anchor = true;
  }
  if (!have_anchor) {
    FeasiblePoint fp =
        feasible_point(cons, p, problem.n_rows, problem.n_cols, opts.warm_start);
    if (!fp.feasible || !strictly_interior(fp.t)) {
      sol.status = QcqpStatus::Infeasible;
      sol.t = MatC::Zero(problem.n_rows, problem.n_cols);
      sol.phase1_value = fp.phase1_value;
      sol.farkas_weights = fp.farkas_weights;
      return sol;
    }
    anchor = fp.t;
  }

  MatC t = anchor;
  if (opts.warm_start) {
    double gamma = 0.9;
    while (gamma > 1e-4) {
      MatC cand = anchor + gamma * (*opts.warm_start - anchor);
      if (strictly_interior(cand)) {
        t = cand;
        break;
      }
      gamma *= 0.5;
    }
  }

  // Feasible-start barrier method: center t against
  //   psi(t) = f0(t)/mu - sum_i log(-f_i(t)),
  // reduce mu by kSigma, recover duals lambda_i = mu / s_i. Newton steps are
  // damped by the decrement (self-concordant rule), so no objective values
  // enter the line search.
  std::vector<double> s(m), inv_s(m);
  std::vector<MatC> grads(m), hinv_g(m);
  MatR small(m, m);
  VecR ub(m), wcoef(m);

  double mu = 1.0;
  const double mu_floor = opts.tol * scale / m;
  int newton_total = 0;
  bool converged = false;
  bool done = false;

  while (!done && newton_total < opts.max_iter) {
    const bool final_stage = mu <= mu_floor;
    const double center_tol = final_stage ? 1e-6 : 0.25;  // on the Newton decrement

    for (int step = 0; step < 50 && newton_total < opts.max_iter; ++step) {
      values(t, s);
      for (int i = 0; i < m; ++i) {
        s[i] = -s[i];
        inv_s[i] = 1.0 / s[i];
      }
      MatC grad = problem.objective.gradient(t) / mu;
      for (int i = 0; i < mq; ++i) {
        grads[i] = cons[i].gradient(t);
        grad += inv_s[i] * grads[i];
      }
      grads[mq] = 2.0 * t;
      grad += inv_s[mq] * grads[mq];

      // B = 2 (I (x) W); the rank-m real outer-product part of the Hessian is
      // folded in through Woodbury.
      std::vector<double> coef(mq);
      for (int i = 0; i < mq; ++i) coef[i] = inv_s[i];
      MatC w = hessian_core(problem.objective.core / mu, cons, coef,
                            problem.objective.shift / mu + inv_s[mq]);
      Eigen::LLT<MatC> llt(w);
      if (llt.info() != Eigen::Success) {
        w.diagonal().array() += 1e-13 * (1.0 + w.diagonal().real().maxCoeff());
        llt.compute(w);
      }
      const MatC binv_grad = 0.5 * llt.solve(grad);
      for (int i = 0; i < m; ++i) hinv_g[i] = 0.5 * llt.solve(grads[i]);
      for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
          small(i, j) = real_inner(grads[i], hinv_g[j]);
          small(j, i) = small(i, j);
        }
        small(i, i) += s[i] * s[i];
        ub(i) = real_inner(grads[i], binv_grad);
      }
      wcoef = small.ldlt().solve(ub);
      MatC dir = -binv_grad;
      for (int i = 0; i < m; ++i) dir += wcoef(i) * hinv_g[i];

      const double nt = std::sqrt(std::max(0.0, -real_inner(grad, dir)));
      if (final_stage) {
        // the exit quantities are exact here: stationarity residual is
        // mu * grad, complementarity is mu itself
        if (mu * grad.norm() <= opts.tol * scale && nt <= 1e-2) break;
      } else if (nt <= center_tol) {
        break;
      }
      ++newton_total;

      double alpha = nt > 0.25 ? 1.0 / (1.0 + nt) : 1.0;
      std::vector<double> f_new(m);
      for (int ls = 0; ls < 60; ++ls) {
        const MatC cand = t + alpha * dir;
        values(cand, f_new);
        bool interior = true;
        for (double v : f_new) interior = interior && v < 0.0;
        if (interior) {
          t = cand;
          break;
        }
        alpha *= 0.5;
      }
    }

    if (final_stage) {
      done = true;
    } else {
      mu = std::max(mu * kSigma, mu_floor);
    }
  }

  // Active-set polish: the barrier iterate carries an O(sqrt(eps)) stationarity
  // floor from the ill-conditioned final stages; a few Newton steps on the
  // reduced KKT equalities refine it to machine precision.
  {
    values(t, s);
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      const double slack = -s[i];
      if (mu / slack > slack) active.push_back(i);
    }
    const int a = static_cast<int>(active.size());
    MatC t_p = t;
    VecR lam_p(a);
    for (int i = 0; i < a; ++i) lam_p(i) = mu / -s[active[i]];

    auto kkt_norm = [&](const MatC& tt, const VecR& ll) {
      MatC rd = problem.objective.gradient(tt);
      double feas = 0.0;
      for (int i = 0; i < a; ++i) {
        const int k = active[i];
        rd += ll(i) * (k < mq ? cons[k].gradient(tt) : MatC(2.0 * tt));
        feas = std::max(feas, std::abs(k < mq ? cons[k].value(tt)
                                              : tt.squaredNorm() - p));
      }
      return std::max(rd.norm(), feas);
    };

    bool polish_ok = true;
    for (int it = 0; it < 6 && polish_ok; ++it) {
      MatC rd = problem.objective.gradient(t_p);
      std::vector<MatC> g(a);
      VecR r2(a);
      std::vector<double> coef(mq, 0.0);
      double pow_lam = 0.0;
      for (int i = 0; i < a; ++i) {
        const int k = active[i];
        if (k < mq) {
          g[i] = cons[k].gradient(t_p);
          r2(i) = cons[k].value(t_p);
          coef[k] = lam_p(i);
        } else {
          g[i] = 2.0 * t_p;
          r2(i) = t_p.squaredNorm() - p;
          pow_lam = lam_p(i);
        }
        rd += lam_p(i) * g[i];
      }
      if (kkt_norm(t_p, lam_p) <= 1e-13 * scale) break;
      MatC w = hessian_core(problem.objective.core, cons, coef,
                            problem.objective.shift + pow_lam);
      Eigen::LLT<MatC> llt(w);
      if (llt.info() != Eigen::Success) {
        polish_ok = false;
        break;
      }
      const MatC hinv_rd = 0.5 * llt.solve(rd);
      std::vector<MatC> hinv_gp(a);
      MatR ks(a, a);
      VecR rh(a), dl(a);
      for (int i = 0; i < a; ++i) hinv_gp[i] = 0.5 * llt.solve(g[i]);
      for (int i = 0; i < a; ++i) {
        for (int j = i; j < a; ++j) {
          ks(i, j) = real_inner(g[i], hinv_gp[j]);
          ks(j, i) = ks(i, j);
        }
        rh(i) = r2(i) - real_inner(g[i], hinv_rd);
      }
      if (a > 0) {
        dl = ks.ldlt().solve(rh);
        lam_p += dl;
      }
      MatC dt = -hinv_rd;
      for (int i = 0; i < a; ++i) dt -= dl(i) * hinv_gp[i];
      t_p += dt;
    }

    if (polish_ok && lam_p.size() > 0 && lam_p.minCoeff() < -1e-9 * scale)
      polish_ok = false;
    if (polish_ok) {
      std::vector<double> f_p(m);
      values(t_p, f_p);
      for (int i = 0; i < m; ++i)
        if (f_p[i] > 1e-9 * std::max(1.0, std::abs(i < mq ? cons[i].c : p)))
          polish_ok = false;
      if (polish_ok && kkt_norm(t_p, lam_p) < 1e-2 * scale) {
        t = t_p;
        values(t, s);
        std::fill(sol.multipliers.begin(), sol.multipliers.end(), 0.0);
        for (int i = 0; i < a; ++i)
          sol.multipliers[active[i]] = std::max(0.0, lam_p(i));
        MatC rd = problem.objective.gradient(t);
        double comp = 0.0;
        for (int i = 0; i < m; ++i) {
          rd += sol.multipliers[i] * (i < mq ? cons[i].gradient(t) : MatC(2.0 * t));
          comp = std::max(comp, sol.multipliers[i] * std::abs(s[i]));
        }
        sol.kkt_residual = std::max(rd.norm(), comp) / scale;
        converged = sol.kkt_residual <= 10.0 * opts.tol;
      }
    }
    if (!converged) {
      values(t, s);
      MatC rd = problem.objective.gradient(t);
      double comp = 0.0;
      for (int i = 0; i < m; ++i) {
        const double lam = mu / std::max(1e-300, -s[i]);
        rd += lam * (i < mq ? cons[i].gradient(t) : MatC(2.0 * t));
        comp = std::max(comp, lam * -s[i]);
        sol.multipliers[i] = lam;
      }
      sol.kkt_residual = std::max(rd.norm(), comp) / scale;
      converged = sol.kkt_residual <= 10.0 * opts.tol;
    }
  }

  sol.t = t;
  sol.objective = problem.objective.value(t);
  sol.iterations = newton_total;
  sol.status = converged ? QcqpStatus::Optimal : QcqpStatus::MaxIterations;
  return sol;
}

FeasiblePoint feasible_point(const std::vector<QoSQuadratic>& cons, double power,
                             int n_rows, int n_cols, const MatC* warm) {
  const int mq = static_cast<int>(cons.size());
  FeasiblePoint out;
  if (mq == 0) {
    out.feasible = true;
    out.t = MatC::Zero(n_rows, n_cols);
    out.max_violation = -power;
    out.phase1_value = -power;
    return out;
  }

  double cmax = 1.0;
  for (const auto& c : cons) cmax = std::max(cmax, std::abs(c.c));
  const double scale = std::max(cmax, power);
  // Tiny curvature on t only; sbar stays exactly linear and is eliminated
  // through the bordered KKT row, so the Newton system needs no large
  // regularizers. Bias on the reported min-max value is <= reg * power.
  const double reg = 1e-8 * scale / std::max(1.0, power);

  MatC t = MatC::Zero(n_rows, n_cols);
  if (warm) {
    t = *warm;
    const double n2 = t.squaredNorm();
    if (n2 > 0.9 * power) t *= std::sqrt(0.9 * power / n2);
  }
  const int m = mq + 1;
  auto values = [&](const MatC& tt, double sb, std::vector<double>& f) {
    for (int i = 0; i < mq; ++i) f[i] = cons[i].value(tt) - sb;
    f[mq] = tt.squaredNorm() - power;
  };

  double sbar = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < mq; ++i) sbar = std::max(sbar, cons[i].value(t));
  sbar += std::max(1.0, 0.1 * std::abs(sbar));

  std::vector<double> s(m), lam(m);
  values(t, sbar, s);
  for (double& v : s) v = -v;
  for (int i = 0; i < m; ++i) lam[i] = std::clamp(1.0 / s[i], 1e-8, 1e8);

  auto residual_norm = [&](const MatC& tt, double sb, const std::vector<double>& ll,
                           double mu) {
    std::vector<double> f(m);
    values(tt, sb, f);
    MatC rd = 2.0 * reg * tt;
    for (int i = 0; i < mq; ++i) rd += ll[i] * cons[i].gradient(tt);
    rd += ll[mq] * 2.0 * tt;
    double rs = 1.0;
    for (int i = 0; i < mq; ++i) rs -= ll[i];
    double sq = rd.squaredNorm() + rs * rs;
    for (int i = 0; i < m; ++i) {
      const double rc = ll[i] * (-f[i]) - mu;
      sq += rc * rc;
    }
    return std::sqrt(sq);
  };

  std::vector<MatC> grads(m);
  // Bordered system over (dlam, dsbar): symmetric saddle, solved by LU.
  MatR kkt(m + 1, m + 1);
  VecR rhs(m + 1), step(m + 1);
  const int max_iter = 150;

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter;
    values(t, sbar, s);
    for (double& v : s) v = -v;
    double eta = 0.0;
    for (int i = 0; i < m; ++i) eta += lam[i] * s[i];
    const double mu = kSigma * eta / m;

    MatC r_dual = 2.0 * reg * t;
    for (int i = 0; i < mq; ++i) {
      grads[i] = cons[i].gradient(t);
      r_dual += lam[i] * grads[i];
    }
    grads[mq] = 2.0 * t;
    r_dual += lam[mq] * grads[mq];
    double r_dual_s = 1.0;
    for (int i = 0; i < mq; ++i) r_dual_s -= lam[i];

    if (std::sqrt(r_dual.squaredNorm() + r_dual_s * r_dual_s) <= 1e-9 * scale &&
        eta <= 1e-9 * scale)
      break;

    const MatC base = MatC::Zero(n_rows, n_rows);
    std::vector<double> coef(mq);
    for (int i = 0; i < mq; ++i) coef[i] = lam[i];
    MatC w = hessian_core(base, cons, coef, reg + lam[mq]);
    Eigen::LLT<MatC> llt(w);
    if (llt.info() != Eigen::Success) {
      w.diagonal().array() += 1e-12 * (1.0 + w.diagonal().real().maxCoeff());
      llt.compute(w);
    }
    const MatC hinv_rd = 0.5 * llt.solve(r_dual);
    std::vector<MatC> hinv_g(m);
    for (int i = 0; i < m; ++i) hinv_g[i] = 0.5 * llt.solve(grads[i]);

    kkt.setZero();
    rhs.setZero();
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        kkt(i, j) = real_inner(grads[i], hinv_g[j]);
        kkt(j, i) = kkt(i, j);
      }
      kkt(i, i) += s[i] / lam[i];
      if (i < mq) {
        kkt(i, m) = 1.0;
        kkt(m, i) = 1.0;
      }
      rhs(i) = -(lam[i] * s[i] - mu) / lam[i] - real_inner(grads[i], hinv_rd);
    }
    rhs(m) = r_dual_s;
    step = kkt.partialPivLu().solve(rhs);

    MatC dt = -hinv_rd;
    for (int i = 0; i < m; ++i) dt -= step(i) * hinv_g[i];
    const double dsbar = step(m);

    double alpha = 1.0;
    for (int i = 0; i < m; ++i)
      if (step(i) < 0.0) alpha = std::min(alpha, -lam[i] / step(i));
    alpha = std::min(1.0, 0.99 * alpha);

    const double r0 = residual_norm(t, sbar, lam, mu);
    bool accepted = false;
    MatC t_new;
    double sbar_new = sbar;
    std::vector<double> lam_new(m), f_new(m);
    for (int ls = 0; ls < 50; ++ls) {
      t_new = t + alpha * dt;
      sbar_new = sbar + alpha * dsbar;
      for (int i = 0; i < m; ++i) lam_new[i] = lam[i] + alpha * step(i);
      values(t_new, sbar_new, f_new);
      bool interior = true;
      for (double v : f_new) interior = interior && v < 0.0;
      if (interior &&
          residual_norm(t_new, sbar_new, lam_new, mu) <= (1.0 - 0.01 * alpha) * r0) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    t = t_new;
    sbar = sbar_new;
    lam = lam_new;
  }

  out.t = t;
  out.phase1_value = sbar;
  double maxv = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < mq; ++i) maxv = std::max(maxv, cons[i].value(t));
  out.max_violation = maxv;
  out.feasible = maxv < 0.0 && t.squaredNorm() < power;
  double lam_sum = 0.0;
  for (int i = 0; i < mq; ++i) lam_sum += lam[i];
  out.farkas_weights.resize(mq);
  for (int i = 0; i < mq; ++i)
    out.farkas_weights[i] = lam_sum > 0.0 ? lam[i] / lam_sum : 0.0;
  return out;
}

}  // namespace dfrc
