// Copyright 2026 The acqpt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acqpt/cone_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace acqpt {

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::max_iter: return "max_iter";
    case SolverStatus::infeasible: return "infeasible";
  }
  throw std::logic_error("to_string: bad status");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One element of the product cone space (not necessarily in the cone).
struct Element {
  Matrix h;
  RealVector o;
  std::vector<RealVector> q;
};

// Second-order cone helpers. J = diag(1, -1, ..., -1).
double jdot(const RealVector& a, const RealVector& b) {
  return a[0] * b[0] - a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

RealVector jmul(const RealVector& a) {
  RealVector r = -a;
  r[0] = a[0];
  return r;
}

// Quadratic representation P(u)v = 2 u (u.v) - (u'Ju) Jv for unit-J u.
RealVector quad_rep(const RealVector& u, const RealVector& v) {
  return 2.0 * u * u.dot(v) - jmul(v);
}

RealVector arrow_prod(const RealVector& a, const RealVector& b) {
  RealVector r(a.size());
  r[0] = a.dot(b);
  r.tail(a.size() - 1) =
      a[0] * b.tail(b.size() - 1) + b[0] * a.tail(a.size() - 1);
  return r;
}

RealVector arrow_solve(const RealVector& lam, const RealVector& r) {
  const Index n = lam.size();
  double den = lam[0] * lam[0] - lam.tail(n - 1).squaredNorm();
  RealVector u(n);
  u[0] = (lam[0] * r[0] - lam.tail(n - 1).dot(r.tail(n - 1))) / den;
  u.tail(n - 1) = (r.tail(n - 1) - u[0] * lam.tail(n - 1)) / lam[0];
  return u;
}

// Largest t with lam + t d in the cone, for lam interior.
double soc_max_step(const RealVector& lam, const RealVector& d) {
  double a = jdot(d, d);
  double b = 2.0 * jdot(lam, d);
  double c = jdot(lam, lam);
  double best = kInf;
  if (std::abs(a) < 1e-300) {
    if (b < 0.0) best = -c / b;
  } else {
    double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      double sq = std::sqrt(disc);
      double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
      double r1 = qq / a;
      double r2 = (qq != 0.0) ? c / qq : kInf;
      if (r1 > 0.0) best = std::min(best, r1);
      if (r2 > 0.0) best = std::min(best, r2);
    }
  }
  if (d[0] < 0.0) best = std::min(best, -lam[0] / d[0]);
  return best;
}

struct Scaling {
  // Hermitian block: G = R R^dag, W(v) = G v G, scaled spectrum lam_h.
  Matrix R, Rinv, G;
  RealVector lam_h;
  // Orthant: W(v) = w^2 v.
  RealVector w, lam_o;
  struct Soc {
    double ratio = 1.0;  // aa/bb, W = ratio * P(wbar)
    double eta = 1.0;    // sqrt(ratio)
    RealVector wbar, qv, qi, lam;
  };
  std::vector<Soc> soc;
};

class Worker {
 public:
  Worker(const ConeProblem& p, const SolverOptions& o) : prob_(p), opts_(o) {
    nh_ = prob_.herm_dim;
    no_ = prob_.orthant_dim;
    m_ = static_cast<Index>(prob_.rows.size());
    degree_ = static_cast<double>(nh_ + no_) +
              static_cast<double>(prob_.soc_dims.size());
    if (degree_ <= 0.0) throw std::invalid_argument("solve_cone: empty cone");
    pool_mat_.resize(nh_, static_cast<Index>(prob_.pool.size()));
    for (Index i = 0; i < pool_mat_.cols(); ++i)
      pool_mat_.col(i) = prob_.pool[static_cast<std::size_t>(i)];
    c_ = build_linear(prob_.objective);
    if (prob_.dense_objective.size() > 0) c_.h += prob_.dense_objective;
    b_.resize(m_);
    for (Index i = 0; i < m_; ++i)
      b_[i] = prob_.rows[static_cast<std::size_t>(i)].rhs;
    norm_b_ = m_ > 0 ? b_.norm() : 0.0;
    norm_c_ = std::sqrt(inner(c_, c_));
  }

  ConeSolution run();

 private:
  Element zero() const {
    Element e;
    e.h = Matrix::Zero(nh_, nh_);
    e.o = RealVector::Zero(no_);
    for (Index s : prob_.soc_dims) e.q.push_back(RealVector::Zero(s));
    return e;
  }

  Element identity(double scale) const {
    Element e = zero();
    e.h += scale * Matrix::Identity(nh_, nh_);
    e.o.array() += scale;
    for (RealVector& v : e.q) v[0] = scale;
    return e;
  }

  double inner(const Element& a, const Element& b) const {
    double acc = a.h.cwiseProduct(b.h.conjugate()).sum().real();
    acc += a.o.dot(b.o);
    for (std::size_t s = 0; s < a.q.size(); ++s) acc += a.q[s].dot(b.q[s]);
    return acc;
  }

  Element build_linear(const ConeRow& row) const {
    Element e = zero();
    add_scaled(e, row, 1.0);
    return e;
  }

  void add_scaled(Element& acc, const ConeRow& row, double s) const {
    for (const CrossTerm& t : row.cross) {
      const Vector& x = prob_.pool[static_cast<std::size_t>(t.x)];
      const Vector& y = prob_.pool[static_cast<std::size_t>(t.y)];
      Complex w = s * t.gamma * t.c;
      acc.h.noalias() += w * (x * y.adjoint());
      acc.h.noalias() += std::conj(w) * (y * x.adjoint());
    }
    for (const auto& [r, c, v] : row.entries) acc.h(r, c) += s * v;
    for (const auto& [idx, coef] : row.orthant) acc.o[idx] += s * coef;
    for (const auto& [blk, idx, coef] : row.soc) acc.q[blk][idx] += s * coef;
  }

  double row_dot(const ConeRow& row, const Element& x) const {
    double acc = 0.0;
    for (const CrossTerm& t : row.cross) {
      const Vector& xv = prob_.pool[static_cast<std::size_t>(t.x)];
      const Vector& yv = prob_.pool[static_cast<std::size_t>(t.y)];
      Complex inner_xy = (yv.adjoint() * x.h * xv)(0, 0);
      acc += 2.0 * t.gamma * (t.c * inner_xy).real();
    }
    for (const auto& [r, c, v] : row.entries) acc += (v * x.h(c, r)).real();
    for (const auto& [idx, coef] : row.orthant) acc += coef * x.o[idx];
    for (const auto& [blk, idx, coef] : row.soc) acc += coef * x.q[blk][idx];
    return acc;
  }

  Element adjoint_apply(const RealVector& y) const {
    Element e = zero();
    for (Index i = 0; i < m_; ++i)
      add_scaled(e, prob_.rows[static_cast<std::size_t>(i)], y[i]);
    return e;
  }

  bool compute_scaling(const Element& x, const Element& z, Scaling& sc) const;
  RealMatrix build_schur(const Scaling& sc) const;

  Element w_apply(const Scaling& sc, const Element& v) const {
    Element r = zero();
    if (nh_ > 0) {
      r.h = sc.G * v.h * sc.G;
      r.h = 0.5 * (r.h + r.h.adjoint()).eval();
    }
    r.o = sc.w.array().square() * v.o.array();
    for (std::size_t s = 0; s < v.q.size(); ++s)
      r.q[s] = sc.soc[s].ratio * quad_rep(sc.soc[s].wbar, v.q[s]);
    return r;
  }

  Element down_x(const Scaling& sc, const Element& v) const {
    Element r = zero();
    if (nh_ > 0) r.h = sc.Rinv * v.h * sc.Rinv.adjoint();
    r.o = v.o.array() / sc.w.array();
    for (std::size_t s = 0; s < v.q.size(); ++s)
      r.q[s] = quad_rep(sc.soc[s].qi, v.q[s]) / sc.soc[s].eta;
    return r;
  }

  Element down_z(const Scaling& sc, const Element& v) const {
    Element r = zero();
    if (nh_ > 0) r.h = sc.R.adjoint() * v.h * sc.R;
    r.o = sc.w.array() * v.o.array();
    for (std::size_t s = 0; s < v.q.size(); ++s)
      r.q[s] = sc.soc[s].eta * quad_rep(sc.soc[s].qv, v.q[s]);
    return r;
  }

  Element up_x(const Scaling& sc, const Element& e) const {
    Element r = zero();
    if (nh_ > 0) {
      r.h = sc.R * e.h * sc.R.adjoint();
      r.h = 0.5 * (r.h + r.h.adjoint()).eval();
    }
    r.o = sc.w.array() * e.o.array();
    for (std::size_t s = 0; s < e.q.size(); ++s)
      r.q[s] = sc.soc[s].eta * quad_rep(sc.soc[s].qv, e.q[s]);
    return r;
  }

  Element scaled_lambda(const Scaling& sc) const {
    Element e = zero();
    if (nh_ > 0) e.h = sc.lam_h.asDiagonal();
    e.o = sc.lam_o;
    for (std::size_t s = 0; s < e.q.size(); ++s) e.q[s] = sc.soc[s].lam;
    return e;
  }

  Element jordan_prod(const Element& a, const Element& b) const {
    Element r = zero();
    if (nh_ > 0) r.h = 0.5 * (a.h * b.h + b.h * a.h);
    r.o = a.o.array() * b.o.array();
    for (std::size_t s = 0; s < a.q.size(); ++s)
      r.q[s] = arrow_prod(a.q[s], b.q[s]);
    return r;
  }

  Element jordan_solve(const Scaling& sc, const Element& rhs) const {
    Element e = zero();
    for (Index i = 0; i < nh_; ++i)
      for (Index j = 0; j < nh_; ++j)
        e.h(i, j) = 2.0 * rhs.h(i, j) / (sc.lam_h[i] + sc.lam_h[j]);
    e.o = rhs.o.array() / sc.lam_o.array();
    for (std::size_t s = 0; s < rhs.q.size(); ++s)
      e.q[s] = arrow_solve(sc.soc[s].lam, rhs.q[s]);
    return e;
  }

  // Largest t with lambda + t d still in the cone.
  double max_step(const Scaling& sc, const Element& d) const {
    double best = kInf;
    if (nh_ > 0) {
      RealVector root = sc.lam_h.cwiseSqrt();
      Matrix scaled = d.h;
      for (Index i = 0; i < nh_; ++i)
        for (Index j = 0; j < nh_; ++j) scaled(i, j) /= root[i] * root[j];
      Eigen::SelfAdjointEigenSolver<Matrix> es(scaled,
                                               Eigen::EigenvaluesOnly);
      double lo = es.eigenvalues().minCoeff();
      if (lo < 0.0) best = std::min(best, -1.0 / lo);
    }
    for (Index i = 0; i < no_; ++i)
      if (d.o[i] < 0.0) best = std::min(best, -sc.lam_o[i] / d.o[i]);
    for (std::size_t s = 0; s < d.q.size(); ++s)
      best = std::min(best, soc_max_step(sc.soc[s].lam, d.q[s]));
    return best;
  }

  const ConeProblem& prob_;
  const SolverOptions& opts_;
  Index nh_ = 0, no_ = 0, m_ = 0;
  double degree_ = 0.0;
  Matrix pool_mat_;
  Element c_;
  RealVector b_;
  double norm_b_ = 0.0, norm_c_ = 0.0;
  // Per-iteration bracket cache for the Schur assembly.
  mutable Matrix pool_g_;      // G * pool
  mutable Matrix brackets_;    // pool^dag G pool
};

bool Worker::compute_scaling(const Element& x, const Element& z,
                             Scaling& sc) const {
  if (nh_ > 0) {
    // Retry with a diagonal jitter when an iterate sits numerically on
    // the cone boundary; the scaling stays a valid interior map.
    auto chol = [this](const Matrix& a, Matrix& lout) {
      Eigen::LLT<Matrix> llt(a);
      double jitter = 1e-14 * (1.0 + a.trace().real() / nh_);
      for (int attempt = 0; attempt < 3 && llt.info() != Eigen::Success;
           ++attempt) {
        llt.compute(a + jitter * Matrix::Identity(nh_, nh_));
        jitter *= 1e2;
      }
      if (llt.info() != Eigen::Success) return false;
      lout = llt.matrixL();
      return true;
    };
    Matrix l, rz;
    if (!chol(x.h, l) || !chol(z.h, rz)) return false;
    Eigen::BDCSVD<Matrix> svd(Matrix(rz.adjoint() * l),
                              Eigen::ComputeFullU | Eigen::ComputeFullV);
    RealVector sig = svd.singularValues();
    if (sig.minCoeff() <= 0.0) return false;
    RealVector inv_root = sig.cwiseSqrt().cwiseInverse();
    sc.R = l * svd.matrixV() * inv_root.asDiagonal();
    // Rinv = sig^{1/2} V^dag L^{-1} via a triangular solve.
    Matrix lt = l.adjoint();
    Matrix lt_inv_v =
        lt.triangularView<Eigen::Upper>().solve(svd.matrixV());
    sc.Rinv = sig.cwiseSqrt().asDiagonal() * lt_inv_v.adjoint();
    sc.G = sc.R * sc.R.adjoint();
    sc.lam_h = sig;
    pool_g_ = sc.G * pool_mat_;
    brackets_ = pool_mat_.adjoint() * pool_g_;
  }
  sc.w = (x.o.array() / z.o.array()).sqrt();
  sc.lam_o = (x.o.array() * z.o.array()).sqrt();
  sc.soc.clear();
  for (std::size_t s = 0; s < x.q.size(); ++s) {
    const RealVector& xs = x.q[s];
    const RealVector& zs = z.q[s];
    double axx = jdot(xs, xs), azz = jdot(zs, zs);
    if (axx <= 0.0 || azz <= 0.0 || xs[0] <= 0.0 || zs[0] <= 0.0)
      return false;
    Scaling::Soc blk;
    double aa = std::sqrt(axx), bb = std::sqrt(azz);
    RealVector xn = xs / aa, zn = zs / bb;
    double gamma = std::sqrt(0.5 * (1.0 + xn.dot(zn)));
    blk.wbar = (xn + jmul(zn)) / (2.0 * gamma);
    blk.qv = blk.wbar;
    blk.qv[0] += 1.0;
    blk.qv /= std::sqrt(2.0 * (1.0 + blk.wbar[0]));
    blk.qi = jmul(blk.qv);
    blk.ratio = aa / bb;
    blk.eta = std::sqrt(blk.ratio);
    blk.lam = blk.eta * quad_rep(blk.qv, zs);
    sc.soc.push_back(std::move(blk));
  }
  return true;
}

RealMatrix Worker::build_schur(const Scaling& sc) const {
  RealMatrix mmat = RealMatrix::Zero(m_, m_);
  auto bracket = [&](Index a, Index b) -> Complex { return brackets_(a, b); };
  for (Index i = 0; i < m_; ++i) {
    const ConeRow& ri = prob_.rows[static_cast<std::size_t>(i)];
    for (Index j = i; j < m_; ++j) {
      const ConeRow& rj = prob_.rows[static_cast<std::size_t>(j)];
      double acc = 0.0;
      for (const CrossTerm& t1 : ri.cross) {
        for (const CrossTerm& t2 : rj.cross) {
          Complex s = t1.c * t2.c * bracket(t1.y, t2.x) * bracket(t2.y, t1.x);
          s += t1.c * std::conj(t2.c) * bracket(t1.y, t2.y) *
               bracket(t2.x, t1.x);
          s += std::conj(t1.c) * t2.c * bracket(t1.x, t2.x) *
               bracket(t2.y, t1.y);
          s += std::conj(t1.c) * std::conj(t2.c) * bracket(t1.x, t2.y) *
               bracket(t2.x, t1.y);
          acc += t1.gamma * t2.gamma * s.real();
        }
      }
      auto cross_entries = [&](const ConeRow& rc, const ConeRow& re) {
        Complex s(0.0, 0.0);
        for (const CrossTerm& t : rc.cross) {
          auto px = pool_g_.col(t.x);
          auto py = pool_g_.col(t.y);
          Complex inner_sum(0.0, 0.0);
          for (const auto& [r, c, v] : re.entries) {
            inner_sum += v * (t.c * px[c] * std::conj(py[r]) +
                              std::conj(t.c) * py[c] * std::conj(px[r]));
          }
          s += t.gamma * inner_sum;
        }
        return s.real();
      };
      acc += cross_entries(ri, rj);
      acc += cross_entries(rj, ri);
      if (!ri.entries.empty() && !rj.entries.empty()) {
        Complex s(0.0, 0.0);
        for (const auto& [r1, c1, v1] : ri.entries)
          for (const auto& [r2, c2, v2] : rj.entries)
            s += v1 * v2 * sc.G(c1, r2) * sc.G(c2, r1);
        acc += s.real();
      }
      for (const auto& [i1, co1] : ri.orthant)
        for (const auto& [i2, co2] : rj.orthant)
          if (i1 == i2) acc += co1 * co2 * sc.w[i1] * sc.w[i1];
      for (const auto& [b1, k1, co1] : ri.soc)
        for (const auto& [b2, k2, co2] : rj.soc)
          if (b1 == b2) {
            const Scaling::Soc& blk = sc.soc[static_cast<std::size_t>(b1)];
            double jkk = (k1 == k2) ? (k1 == 0 ? 1.0 : -1.0) : 0.0;
            acc += co1 * co2 * blk.ratio *
                   (2.0 * blk.wbar[k1] * blk.wbar[k2] - jkk);
          }
      mmat(i, j) = acc;
      mmat(j, i) = acc;
    }
  }
  return mmat;
}

ConeSolution Worker::run() {
  // Identity start scaled to the data so the first iterations do not have
  // to travel orders of magnitude in norm before residuals can shrink.
  double tp = std::max(1.0, norm_b_ / static_cast<double>(degree_));
  double td = std::max(1.0, norm_c_ / std::sqrt(static_cast<double>(degree_)));
  Element x = identity(tp);
  Element z = identity(td);
  RealVector y = RealVector::Zero(m_);

  // Snapshot of the best iterate seen, returned on abnormal exits where
  // the final iterate has drifted (stalls can wander out of the cone).
  double best_score = std::numeric_limits<double>::infinity();
  Element best_x = x;
  RealVector best_y = y;
  double best_pr = 1.0, best_dr = 1.0, best_gap = 1.0;

  ConeSolution sol;
  auto finish = [&](SolverStatus st, double pr, double dr, double gap,
                    int iters) {
    double score = std::max({pr, dr, std::max(gap, 0.0)});
    if (st != SolverStatus::infeasible && best_score < score) {
      x = best_x;
      y = best_y;
      pr = best_pr;
      dr = best_dr;
      gap = best_gap;
    }
    if (st == SolverStatus::max_iter && pr < opts_.accept_tol &&
        dr < opts_.accept_tol && gap < opts_.accept_tol)
      st = SolverStatus::optimal;
    sol.status = st;
    sol.objective = inner(c_, x);
    sol.herm = x.h;
    sol.orthant = x.o;
    sol.soc = x.q;
    sol.y = y;
    sol.gap = gap;
    sol.primal_residual = pr;
    sol.dual_residual = dr;
    sol.iterations = iters;
    return sol;
  };

  int stalled = 0;
  for (int it = 0; it < opts_.max_iter; ++it) {
    RealVector rp(m_);
    for (Index i = 0; i < m_; ++i)
      rp[i] = b_[i] - row_dot(prob_.rows[static_cast<std::size_t>(i)], x);
    Element rd = c_;
    {
      Element ay = adjoint_apply(y);
      rd.h -= ay.h + z.h;
      rd.o -= ay.o + z.o;
      for (std::size_t s = 0; s < rd.q.size(); ++s)
        rd.q[s] -= ay.q[s] + z.q[s];
    }
    double gap_abs = inner(x, z);
    double mu = gap_abs / degree_;
    double pr = rp.norm() / (1.0 + norm_b_);
    double dr = std::sqrt(std::max(0.0, inner(rd, rd))) / (1.0 + norm_c_);
    double pobj = inner(c_, x);
    double dobj = b_.dot(y);
    double rel_gap = gap_abs / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (opts_.log)
      opts_.log(IterationInfo{it, mu, pr, dr, rel_gap});
    double score = std::max({pr, dr, std::max(rel_gap, 0.0)});
    if (mu > 0.0 && score < best_score) {
      best_score = score;
      best_x = x;
      best_y = y;
      best_pr = pr;
      best_dr = dr;
      best_gap = rel_gap;
    }
    if (pr < opts_.feas_tol && dr < opts_.feas_tol &&
        rel_gap < opts_.gap_tol)
      return finish(SolverStatus::optimal, pr, dr, rel_gap, it);
    // Farkas-style certificate: y with b'y > 0 and A*(y) + Z near zero.
    // Only examined while the primal residual is stuck well above feas_tol.
    if (pr > 1e3 * opts_.feas_tol && dobj > 1e-8 * (1.0 + y.norm())) {
      Element cert = c_;
      cert.h -= rd.h;
      cert.o -= rd.o;
      for (std::size_t s = 0; s < cert.q.size(); ++s) cert.q[s] -= rd.q[s];
      double cert_norm = std::sqrt(std::max(0.0, inner(cert, cert)));
      if (cert_norm / dobj < opts_.infeas_tol)
        return finish(SolverStatus::infeasible, pr, dr, rel_gap, it);
    }
    if (!std::isfinite(mu) || mu <= 0.0 || mu > 1e14)
      return finish(SolverStatus::max_iter, pr, dr, rel_gap, it);

    Scaling sc;
    if (!compute_scaling(x, z, sc))
      return finish(SolverStatus::max_iter, pr, dr, rel_gap, it);
    RealMatrix mmat = build_schur(sc);
    // Tiny Tikhonov term, scaled per row so badly mixed magnitudes on the
    // diagonal stay a uniform relative perturbation (refinement would
    // diverge under a flat absolute shift). It also keeps the
    // factorization valid when M is singular; a null component of the rhs
    // then drives y along the corresponding ray, which is how primal
    // infeasibility surfaces.
    RealVector reg =
        1e-13 * (RealVector::Ones(m_) + mmat.diagonal().cwiseAbs());
    RealMatrix regged = mmat;
    regged.diagonal() += reg;
    Eigen::LDLT<RealMatrix> ldlt(regged);
    if (ldlt.info() != Eigen::Success) {
      regged.diagonal() += 1e3 * reg;
      ldlt.compute(regged);
    }
    auto solve_m = [&](const RealVector& rhs) {
      RealVector dy = ldlt.solve(rhs);
      for (int round = 0; round < 2; ++round) {
        RealVector resid = rhs - mmat * dy;
        dy += ldlt.solve(resid);
      }
      return dy;
    };
    Element wrd = w_apply(sc, rd);
    Element lambda = scaled_lambda(sc);

    auto newton = [&](const Element& e_scaled, Element& dx_out,
                      Element& dz_out, RealVector& dy_out) {
      Element se = up_x(sc, e_scaled);
      RealVector rhs(m_);
      for (Index i = 0; i < m_; ++i) {
        const ConeRow& row = prob_.rows[static_cast<std::size_t>(i)];
        rhs[i] = rp[i] - row_dot(row, se) + row_dot(row, wrd);
      }
      dy_out = solve_m(rhs);
      Element adj = adjoint_apply(dy_out);
      dz_out = rd;
      dz_out.h -= adj.h;
      dz_out.o -= adj.o;
      for (std::size_t s = 0; s < dz_out.q.size(); ++s)
        dz_out.q[s] -= adj.q[s];
      Element wdz = w_apply(sc, dz_out);
      dx_out = se;
      dx_out.h -= wdz.h;
      dx_out.o -= wdz.o;
      for (std::size_t s = 0; s < dx_out.q.size(); ++s)
        dx_out.q[s] -= wdz.q[s];
    };

    // Predictor: scaled complementarity target is -lambda.
    Element e_aff = lambda;
    e_aff.h = -e_aff.h;
    e_aff.o = -e_aff.o;
    for (RealVector& v : e_aff.q) v = -v;
    Element dx_a, dz_a;
    RealVector dy_a;
    newton(e_aff, dx_a, dz_a, dy_a);
    Element sdx_a = down_x(sc, dx_a);
    Element sdz_a = down_z(sc, dz_a);
    // One shared step length: separate primal/dual steps let mu collapse
    // orders below a geometrically stuck primal residual, after which the
    // stiff systems cannot recover feasibility.
    double a_aff =
        std::min({1.0, max_step(sc, sdx_a), max_step(sc, sdz_a)});
    double mu_aff = 0.0;
    {
      Element xa = lambda, za = lambda;
      xa.h += a_aff * sdx_a.h;
      xa.o += a_aff * sdx_a.o;
      za.h += a_aff * sdz_a.h;
      za.o += a_aff * sdz_a.o;
      for (std::size_t s = 0; s < xa.q.size(); ++s) {
        xa.q[s] += a_aff * sdx_a.q[s];
        za.q[s] += a_aff * sdz_a.q[s];
      }
      mu_aff = inner(xa, za) / degree_;
    }
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // Corrector right-hand side sigma mu e - lambda o lambda - dxa o dza.
    Element rhs_c = jordan_prod(lambda, lambda);
    Element cross = jordan_prod(sdx_a, sdz_a);
    Element target = identity(sigma * mu);
    rhs_c.h = target.h - rhs_c.h - cross.h;
    rhs_c.o = target.o - rhs_c.o - cross.o;
    for (std::size_t s = 0; s < rhs_c.q.size(); ++s)
      rhs_c.q[s] = target.q[s] - rhs_c.q[s] - cross.q[s];
    Element e_cor = jordan_solve(sc, rhs_c);
    Element dx, dz;
    RealVector dy;
    newton(e_cor, dx, dz, dy);
    Element sdx = down_x(sc, dx);
    Element sdz = down_z(sc, dz);
    double alpha = std::min({1.0, opts_.step_fraction * max_step(sc, sdx),
                             opts_.step_fraction * max_step(sc, sdz)});
    if (alpha < 1e-13) {
      if (++stalled >= 2)
        return finish(SolverStatus::max_iter, pr, dr, rel_gap, it);
    } else {
      stalled = 0;
    }
    x.h += alpha * dx.h;
    x.o += alpha * dx.o;
    z.h += alpha * dz.h;
    z.o += alpha * dz.o;
    if (nh_ > 0) {
      // Scaled products shed tiny non-Hermitian debris; project it out so
      // the dense matrices stay consistent with the structured row products.
      x.h = 0.5 * (x.h + x.h.adjoint()).eval();
      z.h = 0.5 * (z.h + z.h.adjoint()).eval();
    }
    for (std::size_t s = 0; s < x.q.size(); ++s) {
      x.q[s] += alpha * dx.q[s];
      z.q[s] += alpha * dz.q[s];
    }
    y += alpha * dy;
  }
  RealVector rp(m_);
  for (Index i = 0; i < m_; ++i)
    rp[i] = b_[i] - row_dot(prob_.rows[static_cast<std::size_t>(i)], x);
  Element ay = adjoint_apply(y);
  Element rd = c_;
  rd.h -= ay.h + z.h;
  rd.o -= ay.o + z.o;
  for (std::size_t s = 0; s < rd.q.size(); ++s) rd.q[s] -= ay.q[s] + z.q[s];
  double gap_abs = inner(x, z);
  double pobj = inner(c_, x);
  double dobj = b_.dot(y);
  return finish(SolverStatus::max_iter, rp.norm() / (1.0 + norm_b_),
                std::sqrt(std::max(0.0, inner(rd, rd))) / (1.0 + norm_c_),
                gap_abs / (1.0 + std::abs(pobj) + std::abs(dobj)),
                opts_.max_iter);
}

}  // namespace

ConeSolution solve_cone(const ConeProblem& problem,
                        const SolverOptions& opts) {
  for (const ConeRow& row : problem.rows) {
    for (const CrossTerm& t : row.cross)
      if (t.x < 0 || t.y < 0 ||
          t.x >= static_cast<Index>(problem.pool.size()) ||
          t.y >= static_cast<Index>(problem.pool.size()))
        throw std::invalid_argument("solve_cone: pool index out of range");
  }
  Worker worker(problem, opts);
  return worker.run();
}

}  // namespace acqpt
