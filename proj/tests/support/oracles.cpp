#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace quadchase::oracle {

QuadState rk4_hold(const ContinuousModel& model, const QuadState& x0,
                   const QuadInput& u, double duration, double h) {
  const QuadState drive = model.B * u + model.G;
  auto f = [&](const QuadState& x) -> QuadState { return model.A * x + drive; };
  const int steps = static_cast<int>(std::llround(duration / h));
  const double dt = duration / steps;
  QuadState x = x0;
  for (int i = 0; i < steps; ++i) {
    const QuadState k1 = f(x);
    const QuadState k2 = f(x + 0.5 * dt * k1);
    const QuadState k3 = f(x + 0.5 * dt * k2);
    const QuadState k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

SectorHalfplanes halfplanes(const PredictionSector& sector) {
  SectorHalfplanes s;
  s.center = sector.center;
  s.radius = sector.radius;
  const double span = sector.theta_hi - sector.theta_lo;
  const Eigen::Vector2d ulo(std::cos(sector.theta_lo), std::sin(sector.theta_lo));
  const Eigen::Vector2d uhi(std::cos(sector.theta_hi), std::sin(sector.theta_hi));
  if (span <= std::numbers::pi) {
    const Eigen::Vector2d n1(ulo.y(), -ulo.x());
    const Eigen::Vector2d n2(-uhi.y(), uhi.x());
    s.normals = {n1, n2};
    s.offsets = {n1.dot(sector.center), n2.dot(sector.center)};
  } else if (span < 2.0 * std::numbers::pi - 1e-12) {
    const Eigen::Vector2d a = sector.center + sector.radius * ulo;
    const Eigen::Vector2d b = sector.center + sector.radius * uhi;
    Eigen::Vector2d n(b.y() - a.y(), a.x() - b.x());
    n.normalize();
    if (n.dot(sector.center - a) > 0.0) n = -n;
    s.normals = {n};
    s.offsets = {n.dot(a)};
  }
  return s;
}

double depth(const SectorHalfplanes& s, const Eigen::Vector2d& p) {
  double d = s.radius - (p - s.center).norm();
  for (std::size_t i = 0; i < s.normals.size(); ++i) {
    d = std::min(d, s.offsets[i] - s.normals[i].dot(p));
  }
  return d;
}

bool inside(const SectorHalfplanes& s, const Eigen::Vector2d& p, double tol) {
  return depth(s, p) >= -tol;
}

GridOptimum grid_inradius(const PredictionSector& sector, int n) {
  const SectorHalfplanes s = halfplanes(sector);
  const double R = sector.radius;
  Eigen::Vector2d lo = sector.center - Eigen::Vector2d(R, R);
  Eigen::Vector2d hi = sector.center + Eigen::Vector2d(R, R);
  GridOptimum best;
  best.depth = -1e300;
  // Each pass grids the current window, then shrinks the window to the
  // bounding box of the near-optimal grid points. The superlevel sets of the
  // (concave) depth are convex, so the maximizer stays inside.
  for (int pass = 0; pass < 40; ++pass) {
    const Eigen::Vector2d h = (hi - lo) / (n - 1);
    std::vector<Eigen::Vector2d> pts;
    std::vector<double> vals;
    pts.reserve(static_cast<std::size_t>(n) * n);
    vals.reserve(pts.capacity());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Eigen::Vector2d p = lo + Eigen::Vector2d(i * h.x(), j * h.y());
        const double d = depth(s, p);
        pts.push_back(p);
        vals.push_back(d);
        if (d > best.depth) best = {p, d};
      }
    }
    const double spacing = h.norm();
    if (spacing < 1e-9) break;
    Eigen::Vector2d nlo = best.point, nhi = best.point;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (vals[k] >= best.depth - 2.0 * spacing) {
        nlo = nlo.cwiseMin(pts[k]);
        nhi = nhi.cwiseMax(pts[k]);
      }
    }
    lo = nlo - h;
    hi = nhi + h;
    if (pass == 0) n = std::min(n, 101);
  }
  return best;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto turn = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                 const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && turn(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double polygon_depth(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p) {
  double d = 1e300;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d& a = hull[i];
    const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d e = b - a;
    const double c = e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
    d = std::min(d, c / e.norm());
  }
  return d;
}

QpSolution interior_point_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                             const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::MatrixXd& E, const Eigen::VectorXd& e,
                             double tol, int max_iter) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = A.rows();
  const Eigen::Index p = E.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd s = (b - A * x).cwiseMax(1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(m);

  const double scale = 1.0 + std::max({f.lpNorm<Eigen::Infinity>(),
                                       m ? b.lpNorm<Eigen::Infinity>() : 0.0,
                                       p ? e.lpNorm<Eigen::Infinity>() : 0.0});
  QpSolution out;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd rd = H * x + f + A.transpose() * z + E.transpose() * y;
    const Eigen::VectorXd rp = A * x + s - b;
    const Eigen::VectorXd re = E * x - e;
    const double mu = m ? s.dot(z) / m : 0.0;
    const double res = std::max({rd.lpNorm<Eigen::Infinity>(),
                                 m ? rp.lpNorm<Eigen::Infinity>() : 0.0,
                                 p ? re.lpNorm<Eigen::Infinity>() : 0.0});
    if (res <= tol * scale && mu <= tol) {
      out.converged = true;
      break;
    }

    const Eigen::VectorXd w = z.cwiseQuotient(s);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + p, n + p);
    K.topLeftCorner(n, n) = H + A.transpose() * w.asDiagonal() * A;
    K.topRightCorner(n, p) = E.transpose();
    K.bottomLeftCorner(p, n) = E;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

    // Newton system
    //   H dx + Aᵀdz + Eᵀdy = r1,  A dx + ds = r2,  E dx = r3,  Z ds + S dz = r4
    // reduced to (dx, dy), with two rounds of iterative refinement on the
    // full system to recover the accuracy lost to the ill-conditioned
    // reduction near the solution.
    auto reduced = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                       const Eigen::VectorXd& r3, const Eigen::VectorXd& r4,
                       Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& ds,
                       Eigen::VectorXd& dz) {
      Eigen::VectorXd rhs(n + p);
      rhs.head(n) = r1 - A.transpose() * (r4 - z.cwiseProduct(r2)).cwiseQuotient(s);
      rhs.tail(p) = r3;
      const Eigen::VectorXd sol = lu.solve(rhs);
      dx = sol.head(n);
      dy = sol.tail(p);
      ds = r2 - A * dx;
      dz = (r4 - z.cwiseProduct(ds)).cwiseQuotient(s);
    };
    auto solve = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                     Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      const Eigen::VectorXd r1 = -rd, r2 = -rp, r3 = -re, r4 = -rc;
      reduced(r1, r2, r3, r4, dx, dy, ds, dz);
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd cx, cy, cs, cz;
        reduced(r1 - (H * dx + A.transpose() * dz + E.transpose() * dy), r2 - (A * dx + ds),
                r3 - E * dx, r4 - (z.cwiseProduct(ds) + s.cwiseProduct(dz)), cx, cy, cs, cz);
        dx += cx;
        dy += cy;
        ds += cs;
        dz += cz;
      }
    };
    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
      }
      return a;
    };

    Eigen::VectorXd dx, dy, ds, dz;
    solve(s.cwiseProduct(z), dx, dy, ds, dz);
    double sigma = 0.0;
    if (m) {
      const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
      const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / m;
      sigma = std::pow(mu_aff / mu, 3);
      const Eigen::VectorXd rc =
          s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(m, sigma * mu);
      solve(rc, dx, dy, ds, dz);
    }
    const double alpha = m ? std::min(1.0, 0.995 * std::min(max_step(s, ds), max_step(z, dz)))
                           : 1.0;
    x += alpha * dx;
    y += alpha * dy;
    s += alpha * ds;
    z += alpha * dz;
  }
  out.x = x;
  out.objective = 0.5 * x.dot(H * x) + f.dot(x);
  return out;
}

}  // namespace quadchase::oracle

namespace quadchase::oracle {

PredictionSector random_sector(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  PredictionSector s;
  s.center = Eigen::Vector2d(10.0 * U(rng) - 5.0, 10.0 * U(rng) - 5.0);
  s.radius = 0.2 + 1.8 * U(rng);
  s.theta_lo = 2.0 * std::numbers::pi * (U(rng) - 0.5);
  s.theta_hi = s.theta_lo + 0.05 + (2.0 * std::numbers::pi - 0.05) * U(rng);
  return s;
}

}  // namespace quadchase::oracle
