#include "mtvrpo/conic.hpp"

#include <algorithm>
#include <cmath>

namespace mtvrpo {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ConeOps {
  explicit ConeOps(const ConeSpec& spec) : spec(spec) {
    int off = spec.nonneg;
    for (int q : spec.soc) {
      soc_off.push_back(off);
      off += q;
    }
    m = off;
    degree = spec.nonneg + static_cast<int>(spec.soc.size());
  }

  // Identity element of the cone product.
  VectorXd unit() const {
    VectorXd e = VectorXd::Zero(m);
    e.head(spec.nonneg).setOnes();
    for (std::size_t k = 0; k < spec.soc.size(); ++k) e[soc_off[k]] = 1.0;
    return e;
  }

  bool interior(const VectorXd& v) const {
    for (int i = 0; i < spec.nonneg; ++i)
      if (v[i] <= 0) return false;
    for (std::size_t k = 0; k < spec.soc.size(); ++k) {
      const int o = soc_off[k], q = spec.soc[k];
      if (v[o] <= v.segment(o + 1, q - 1).norm()) return false;
    }
    return true;
  }

  // Largest step a with v + a dv still in the (closed) cone, capped at `cap`.
  double max_step(const VectorXd& v, const VectorXd& dv, double cap) const {
    double a = cap;
    for (int i = 0; i < spec.nonneg; ++i)
      if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
    for (std::size_t k = 0; k < spec.soc.size(); ++k) {
      const int o = soc_off[k], q = spec.soc[k];
      const double v0 = v[o], d0 = dv[o];
      const auto vb = v.segment(o + 1, q - 1);
      const auto db = dv.segment(o + 1, q - 1);
      const double qa = d0 * d0 - db.squaredNorm();
      const double qb = 2.0 * (v0 * d0 - vb.dot(db));
      const double qc = v0 * v0 - vb.squaredNorm();
      // smallest positive root of qa t^2 + qb t + qc = 0 (qc > 0 inside)
      double root = kInf;
      if (std::abs(qa) < 1e-14) {
        if (qb < -1e-14) root = -qc / qb;
      } else {
        const double disc = qb * qb - 4 * qa * qc;
        if (disc >= 0) {
          const double sq = std::sqrt(disc);
          const double r1 = (-qb - sq) / (2 * qa);
          const double r2 = (-qb + sq) / (2 * qa);
          for (double r : {r1, r2})
            if (r > 1e-14) root = std::min(root, r);
        }
      }
      if (d0 < 0) root = std::min(root, -v0 / d0);
      a = std::min(a, root);
    }
    return a;
  }

  // Jordan product u o v.
  VectorXd prod(const VectorXd& u, const VectorXd& v) const {
    VectorXd r(m);
    for (int i = 0; i < spec.nonneg; ++i) r[i] = u[i] * v[i];
    for (std::size_t k = 0; k < spec.soc.size(); ++k) {
      const int o = soc_off[k], q = spec.soc[k];
      r[o] = u.segment(o, q).dot(v.segment(o, q));
      r.segment(o + 1, q - 1) =
          u[o] * v.segment(o + 1, q - 1) + v[o] * u.segment(o + 1, q - 1);
    }
    return r;
  }

  // Solve lambda o u = v for u.
  VectorXd solve_prod(const VectorXd& lambda, const VectorXd& v) const {
    VectorXd u(m);
    for (int i = 0; i < spec.nonneg; ++i) u[i] = v[i] / lambda[i];
    for (std::size_t k = 0; k < spec.soc.size(); ++k) {
      const int o = soc_off[k], q = spec.soc[k];
      const double a = lambda[o];
      const auto bb = lambda.segment(o + 1, q - 1);
      const double det = a * a - bb.squaredNorm();
      const double u0 = (a * v[o] - bb.dot(v.segment(o + 1, q - 1))) / det;
      u[o] = u0;
      u.segment(o + 1, q - 1) = (v.segment(o + 1, q - 1) - u0 * bb) / a;
    }
    return u;
  }

  // Nesterov-Todd scaling for the current (s, z): diagonal part for the
  // nonneg block, a dense symmetric W per SOC block. W z = W^{-1} s = lambda.
  struct Scaling {
    VectorXd lp_w2;                  // s_i / z_i
    std::vector<MatrixXd> soc_w;     // W per cone
    std::vector<MatrixXd> soc_winv;  // W^{-1} per cone
    VectorXd lambda;
  };

  Scaling scaling(const VectorXd& s, const VectorXd& z) const {
    Scaling sc;
    sc.lp_w2.resize(spec.nonneg);
    sc.lambda.resize(m);
    for (int i = 0; i < spec.nonneg; ++i) {
      sc.lp_w2[i] = s[i] / z[i];
      sc.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    for (std::size_t k = 0; k < spec.soc.size(); ++k) {
      const int o = soc_off[k], q = spec.soc[k];
      const VectorXd sk = s.segment(o, q), zk = z.segment(o, q);
      const double res_s = sk[0] * sk[0] - sk.tail(q - 1).squaredNorm();
      const double res_z = zk[0] * zk[0] - zk.tail(q - 1).squaredNorm();
      const VectorXd sn = sk / std::sqrt(res_s);
      const VectorXd zn = zk / std::sqrt(res_z);
      const double gamma = std::sqrt((1.0 + sn.dot(zn)) / 2.0);
      VectorXd wb(q);
      wb[0] = (sn[0] + zn[0]) / (2 * gamma);
      wb.tail(q - 1) = (sn.tail(q - 1) - zn.tail(q - 1)) / (2 * gamma);
      const double eta = std::pow(res_s / res_z, 0.25);
      auto arrow = [&](const VectorXd& w, double scale) {
        MatrixXd W(q, q);
        W(0, 0) = w[0];
        W.block(0, 1, 1, q - 1) = w.tail(q - 1).transpose();
        W.block(1, 0, q - 1, 1) = w.tail(q - 1);
        W.block(1, 1, q - 1, q - 1) =
            MatrixXd::Identity(q - 1, q - 1) +
            w.tail(q - 1) * w.tail(q - 1).transpose() / (1.0 + w[0]);
        return (scale * W).eval();
      };
      sc.soc_w.push_back(arrow(wb, eta));
      VectorXd wb_inv = wb;
      wb_inv.tail(q - 1) = -wb.tail(q - 1);
      sc.soc_winv.push_back(arrow(wb_inv, 1.0 / eta));
      sc.lambda.segment(o, q) = sc.soc_w.back() * zk;
    }
    return sc;
  }

  VectorXd apply_w(const Scaling& sc, const VectorXd& v) const {
    VectorXd r(m);
    for (int i = 0; i < spec.nonneg; ++i) r[i] = std::sqrt(sc.lp_w2[i]) * v[i];
    for (std::size_t k = 0; k < spec.soc.size(); ++k) {
      const int o = soc_off[k], q = spec.soc[k];
      r.segment(o, q) = sc.soc_w[k] * v.segment(o, q);
    }
    return r;
  }

  VectorXd apply_winv(const Scaling& sc, const VectorXd& v) const {
    VectorXd r(m);
    for (int i = 0; i < spec.nonneg; ++i) r[i] = v[i] / std::sqrt(sc.lp_w2[i]);
    for (std::size_t k = 0; k < spec.soc.size(); ++k) {
      const int o = soc_off[k], q = spec.soc[k];
      r.segment(o, q) = sc.soc_winv[k] * v.segment(o, q);
    }
    return r;
  }

  ConeSpec spec;
  std::vector<int> soc_off;
  int m = 0;
  int degree = 0;
};

}  // namespace

ConicResult solve_conic(const ConicProblem& prob, const ConicSettings& st) {
  const int n = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.b.size());
  const ConeOps ops(prob.cones);
  const int m = ops.m;

  ConicResult res;
  res.x = VectorXd::Zero(n);
  double best_score = kInf;

  VectorXd x = VectorXd::Zero(n), y = VectorXd::Zero(p);
  VectorXd s = ops.unit(), z = ops.unit();
  double tau = 1.0, kappa = 1.0;

  const double bnorm = p > 0 ? prob.b.lpNorm<Eigen::Infinity>() : 0.0;
  const double hnorm = prob.h.lpNorm<Eigen::Infinity>();
  const double cnorm = prob.c.lpNorm<Eigen::Infinity>();

  // The cone block is eliminated analytically: with
  //   G dx - W^2 dz = r3  =>  dz = W^-2 (G dx - r3),
  // the Newton system reduces to the quasidefinite saddle
  //   [ H   A' ] [dx]   [ r1 + G' W^-2 r3 ]
  //   [ A   0  ] [dy] = [ r2 ],            H = G' W^-2 G.
  const int dim = n + p;
  MatrixXd K(dim, dim);
  MatrixXd winv2G(m, n);  // W^-2 G, rebuilt each iteration

  for (int iter = 0; iter < st.max_iters; ++iter) {
    // Residuals of the homogeneous embedding.
    VectorXd rx = prob.G.transpose() * z + prob.c * tau;
    if (p > 0) rx += prob.A.transpose() * y;
    VectorXd ry = p > 0 ? (prob.A * x - prob.b * tau).eval() : VectorXd();
    VectorXd rz = s + prob.G * x - prob.h * tau;
    const double bty = p > 0 ? prob.b.dot(y) : 0.0;
    const double rtau = kappa + prob.c.dot(x) + bty + prob.h.dot(z);

    // Convergence checks on the de-homogenized point.
    const VectorXd xh = x / tau, sh = s / tau, zh = z / tau;
    const double pobj = prob.c.dot(xh);
    double pres = (prob.G * xh + sh - prob.h).lpNorm<Eigen::Infinity>() / (1.0 + hnorm);
    if (p > 0)
      pres = std::max(pres,
                      (prob.A * xh - prob.b).lpNorm<Eigen::Infinity>() / (1.0 + bnorm));
    VectorXd dres_vec = prob.G.transpose() * zh + prob.c;
    if (p > 0) dres_vec += prob.A.transpose() * (y / tau);
    const double dres = dres_vec.lpNorm<Eigen::Infinity>() / (1.0 + cnorm);
    const double gap = s.dot(z) / (tau * tau);
    const double relgap = gap / std::max(1.0, std::abs(pobj));

    // Keep the best iterate seen; degenerate programs (cone apexes from
    // zero-length legs) can lose ground on the final steps.
    const double score = std::max({pres, dres, std::min(gap, relgap)});
    if (score < best_score) {
      best_score = score;
      res.x = xh;
      res.objective = pobj;
      res.gap = gap;
      res.pres = pres;
      res.dres = dres;
    }
    res.iterations = iter;
#ifdef MTVRPO_CONIC_TRACE
    std::fprintf(stderr, "it %d pobj=%.10f pres=%.2e dres=%.2e gap=%.2e tau=%.2e kappa=%.2e\n",
                 iter, pobj, pres, dres, gap, tau, kappa);
#endif
    if (res.pres <= st.feastol && res.dres <= st.feastol &&
        (res.gap <= st.abstol || res.gap <= st.reltol * std::max(1.0, std::abs(res.objective)))) {
      res.status = ConicStatus::Optimal;
      return res;
    }
    // Infeasibility certificates.
    const double ct = prob.h.dot(z) + bty;
    if (ct < -1e-12) {
      VectorXd cert = prob.G.transpose() * z;
      if (p > 0) cert += prob.A.transpose() * y;
      if (cert.lpNorm<Eigen::Infinity>() / (-ct) <= st.feastol * std::max(1.0, cnorm) &&
          tau <= 1e-8 * std::max(1.0, kappa)) {
        res.status = ConicStatus::PrimalInfeasible;
        return res;
      }
    }
    if (prob.c.dot(x) < -1e-12) {
      double dinf = (prob.G * x + s).lpNorm<Eigen::Infinity>();
      if (p > 0) dinf = std::max(dinf, (prob.A * x).lpNorm<Eigen::Infinity>());
      if (dinf / (-prob.c.dot(x)) <= st.feastol * std::max(1.0, std::max(hnorm, bnorm)) &&
          tau <= 1e-8 * std::max(1.0, kappa)) {
        res.status = ConicStatus::DualInfeasible;
        return res;
      }
    }

    const auto sc = ops.scaling(s, z);
    const double mu = (s.dot(z) + tau * kappa) / (ops.degree + 1);

    for (int i = 0; i < ops.spec.nonneg; ++i) winv2G.row(i) = prob.G.row(i) / sc.lp_w2[i];
    for (std::size_t k = 0; k < ops.spec.soc.size(); ++k) {
      const int o = ops.soc_off[k], q = ops.spec.soc[k];
      winv2G.middleRows(o, q) =
          sc.soc_winv[k] * (sc.soc_winv[k] * prob.G.middleRows(o, q));
    }
    K.setZero();
    K.topLeftCorner(n, n).noalias() = prob.G.transpose() * winv2G;
    if (p > 0) {
      K.block(0, n, n, p) = prob.A.transpose();
      K.block(n, 0, p, n) = prob.A;
    }
    constexpr double kReg = 1e-11;
    for (int i = 0; i < dim; ++i) K(i, i) += (i < n ? kReg : -kReg);
    Eigen::PartialPivLU<MatrixXd> lu(K);

    VectorXd rhs(dim);
    auto solve_reduced = [&](const VectorXd& rx_r, const VectorXd& ry_r,
                             const VectorXd& rz_r, VectorXd& dx, VectorXd& dy,
                             VectorXd& dz) {
      rhs.head(n) = rx_r + winv2G.transpose() * rz_r;
      if (p > 0) rhs.segment(n, p) = ry_r;
      const VectorXd sol = lu.solve(rhs);
      dx = sol.head(n);
      if (p > 0)
        dy = sol.segment(n, p);
      else
        dy.resize(0);
      dz.noalias() = winv2G * dx;
      dz -= ops.apply_winv(sc, ops.apply_winv(sc, rz_r));
    };
    // The cone elimination squares the conditioning, so polish each solve
    // with refinement passes against the full KKT residual.
    auto solve_kkt = [&](const VectorXd& rx_r, const VectorXd& ry_r, const VectorXd& rz_r,
                         VectorXd& dx, VectorXd& dy, VectorXd& dz) {
      solve_reduced(rx_r, ry_r, rz_r, dx, dy, dz);
      for (int pass = 0; pass < 4; ++pass) {
        VectorXd e1 = rx_r - prob.G.transpose() * dz;
        if (p > 0) e1 -= prob.A.transpose() * dy;
        VectorXd e2 = p > 0 ? VectorXd(ry_r - prob.A * dx) : VectorXd();
        VectorXd e3 = rz_r - prob.G * dx + ops.apply_w(sc, ops.apply_w(sc, dz));
        VectorXd cx, cy, cz;
        solve_reduced(e1, e2, e3, cx, cy, cz);
        dx += cx;
        if (p > 0) dy += cy;
        dz += cz;
      }
    };

    VectorXd x2, y2, z2;
    solve_kkt(-prob.c, p > 0 ? VectorXd(prob.b) : VectorXd(), prob.h, x2, y2, z2);

    auto solve_direction = [&](const VectorXd& rx_r, const VectorXd& ry_r,
                               const VectorXd& rz_r, double rtau_r, const VectorXd& v,
                               double v_tk, VectorXd& dx, VectorXd& dy, VectorXd& dz,
                               VectorXd& ds, double& dtau, double& dkappa) {
      const VectorXd wlv = ops.apply_w(sc, ops.solve_prod(sc.lambda, v));
      VectorXd x1, y1, z1;
      solve_kkt(-rx_r, p > 0 ? VectorXd(-ry_r) : VectorXd(), -rz_r - wlv, x1, y1, z1);
      double num = -rtau_r - v_tk / tau - (prob.c.dot(x1) + prob.h.dot(z1));
      double den = prob.c.dot(x2) + prob.h.dot(z2) - kappa / tau;
      if (p > 0) {
        num -= prob.b.dot(y1);
        den += prob.b.dot(y2);
      }
      dtau = num / den;
      dx = x1 + dtau * x2;
      dz = z1 + dtau * z2;
      if (p > 0)
        dy = y1 + dtau * y2;
      else
        dy.resize(0);
      ds = wlv - ops.apply_w(sc, ops.apply_w(sc, dz));
      dkappa = (v_tk - kappa * dtau) / tau;
    };

    // Predictor (affine) direction.
    VectorXd dx_a, dy_a, dz_a, ds_a;
    double dtau_a, dkappa_a;
    solve_direction(rx, ry, rz, rtau, -ops.prod(sc.lambda, sc.lambda), -tau * kappa, dx_a,
                    dy_a, dz_a, ds_a, dtau_a, dkappa_a);
    double alpha_aff = ops.max_step(s, ds_a, 1.0);
    alpha_aff = ops.max_step(z, dz_a, alpha_aff);
    if (dtau_a < 0) alpha_aff = std::min(alpha_aff, -tau / dtau_a);
    if (dkappa_a < 0) alpha_aff = std::min(alpha_aff, -kappa / dkappa_a);
    const double sigma = std::pow(std::clamp(1.0 - alpha_aff, 0.0, 1.0), 3.0);

    // Combined centering + corrector direction.
    VectorXd v = -ops.prod(sc.lambda, sc.lambda) -
                 ops.prod(ops.apply_winv(sc, ds_a), ops.apply_w(sc, dz_a));
    v += sigma * mu * ops.unit();
    const double v_tk = -tau * kappa - dtau_a * dkappa_a + sigma * mu;
    VectorXd dx, dy, dz, ds;
    double dtau, dkappa;
    solve_direction((1 - sigma) * rx, ((1 - sigma) * ry).eval(), (1 - sigma) * rz,
                    (1 - sigma) * rtau, v, v_tk, dx, dy, dz, ds, dtau, dkappa);

    double alpha = ops.max_step(s, ds, 1.0 / 0.98);
    alpha = ops.max_step(z, dz, alpha);
    if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
    if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
    alpha = std::min(0.98 * alpha, 1.0);
    if (!std::isfinite(alpha) || alpha <= 1e-14) break;

    x += alpha * dx;
    if (p > 0) y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (!ops.interior(s) || !ops.interior(z) || tau <= 0 || kappa < 0) break;
  }

  // Ran out of iterations (or lost the interior); the best iterate may
  // already satisfy the tolerances.
  if (res.pres <= st.feastol && res.dres <= st.feastol &&
      (res.gap <= st.abstol || res.gap <= st.reltol * std::max(1.0, std::abs(res.objective)))) {
    res.status = ConicStatus::Optimal;
    return res;
  }
  // Otherwise classify infeasibility with relaxed thresholds.
  if (tau < 1e-6 * std::max(1.0, kappa)) {
    const double bty = p > 0 ? prob.b.dot(y) : 0.0;
    const double ct = prob.h.dot(z) + bty;
    if (ct < -1e-12) {
      VectorXd cert = prob.G.transpose() * z;
      if (p > 0) cert += prob.A.transpose() * y;
      if (cert.lpNorm<Eigen::Infinity>() / (-ct) <= 1e-6 * std::max(1.0, cnorm)) {
        res.status = ConicStatus::PrimalInfeasible;
        return res;
      }
    }
    if (prob.c.dot(x) < -1e-12) {
      res.status = ConicStatus::DualInfeasible;
      return res;
    }
  }
  return res;  // MaxIterations with the best de-homogenized point so far
}

}  // namespace mtvrpo
