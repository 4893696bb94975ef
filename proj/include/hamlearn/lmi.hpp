#pragma once

// Dense primal-dual interior-point solver for small linear matrix
// inequalities:
//
//   minimize    c . x          over x in R^p
//   subject to  A_k(x) = F0_k + sum_i x_i Fi_k  >= 0   (Hermitian blocks)
//
// with the conic dual
//
//   maximize   -sum_k <Y_k, F0_k>   s.t.  sum_k <Y_k, Fi_k> = c_i,  Y_k >= 0.
//
// Iterates keep the slacks S_k = A_k(x) exactly affine in x and strictly
// positive definite via line search, so a strictly feasible start is
// required; phase1() manufactures one (or an infeasibility certificate) by
// minimizing the margin variable t in A_k(x) + t I >= 0. Search directions
// use Nesterov-Todd scaling with a Mehrotra-style centering choice. Blocks
// may be complex Hermitian.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace hamlearn {

struct LmiBlock {
  Eigen::MatrixXcd F0;
  std::vector<Eigen::MatrixXcd> F;  // one coefficient matrix per variable
};

struct LmiProblem {
  int nvars = 0;
  Eigen::VectorXd c;  // minimized objective
  std::vector<LmiBlock> blocks;
};

enum class SolveStatus { optimal, infeasible, numerical_failure };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "numerical_failure";
}

struct LmiSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;         // complementarity <S,Y>, absolute
  double dual_resid = 0.0;  // max_i |c_i - sum_k <Y_k, Fi_k>|
  double primal_margin = 0.0;  // min_k lambda_min(A_k(x)) at the returned x
  int iterations = 0;
  std::vector<Eigen::MatrixXcd> Y;
  // Farkas certificate diagnostics (status == infeasible): Y_k >= 0 with
  // sum_k <Y_k, Fi_k> ~ 0 and sum_k <Y_k, F0_k> < 0, so no x is feasible.
  double cert_value = 0.0;  // -sum_k <Y_k, F0_k>
  double cert_resid = 0.0;  // max_i |sum_k <Y_k, Fi_k>|
};

struct IpmOptions {
  double tol = 1e-10;      // residual target driving the iteration
  double grade_tol = 1e-9; // threshold separating optimal from failure
  int max_iter = 300;
  double step_frac = 0.98; // fraction to the cone boundary
  // Abort early once the objective drops below this (used by phase 1).
  double stop_obj_below = -std::numeric_limits<double>::infinity();
};

namespace lmi_detail {

inline double real_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.conjugate().cwiseProduct(b).sum().real();
}

inline void hermitize(Eigen::MatrixXcd& a) {
  a = 0.5 * (a + Eigen::MatrixXcd(a.adjoint()));
}

inline Eigen::MatrixXcd eval_block(const LmiBlock& blk, const Eigen::VectorXd& x) {
  Eigen::MatrixXcd s = blk.F0;
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) s += x(i) * blk.F[i];
  }
  hermitize(s);
  return s;
}

inline double min_eig(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Largest step alpha keeping S + alpha dS positive definite, via the
// Cholesky factor of S: alpha = -1 / lambda_min(L^{-1} dS L^{-dagger}).
inline double max_step(const Eigen::LLT<Eigen::MatrixXcd>& llt,
                       const Eigen::MatrixXcd& dS) {
  const auto& L = llt.matrixL();
  Eigen::MatrixXcd t = L.solve(dS);
  Eigen::MatrixXcd g = L.solve(t.adjoint()).adjoint();
  hermitize(g);
  const double lmin = min_eig(g);
  if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct BlockState {
  Eigen::MatrixXcd S;      // slack, kept exactly equal to A_k(x)
  Eigen::MatrixXcd Y;      // dual
  Eigen::MatrixXcd S_inv;
  Eigen::MatrixXcd W_inv;  // inverse NT scaling point
  Eigen::LLT<Eigen::MatrixXcd> lltS;
  Eigen::LLT<Eigen::MatrixXcd> lltY;
};

}  // namespace lmi_detail

// Core interior-point loop. `x0` must satisfy A_k(x0) > 0 strictly.
inline LmiSolution ipm_minimize(const LmiProblem& prob, const Eigen::VectorXd& x0,
                                const IpmOptions& opts = {}) {
  using namespace lmi_detail;
  const int p = prob.nvars;
  const int nblocks = static_cast<int>(prob.blocks.size());
  if (prob.c.size() != p) throw std::invalid_argument("ipm: objective size mismatch");

  LmiSolution sol;
  sol.x = x0;
  std::vector<BlockState> st(nblocks);
  double total_dim = 0;
  for (int k = 0; k < nblocks; ++k) {
    st[k].S = eval_block(prob.blocks[k], sol.x);
    st[k].lltS.compute(st[k].S);
    if (st[k].lltS.info() != Eigen::Success) {
      sol.status = SolveStatus::numerical_failure;
      return sol;  // start not strictly feasible
    }
    st[k].Y = Eigen::MatrixXcd::Identity(st[k].S.rows(), st[k].S.cols());
    total_dim += static_cast<double>(st[k].S.rows());
  }

  const double c_scale = 1.0 + prob.c.cwiseAbs().maxCoeff();
  Eigen::VectorXd best_x = sol.x;
  std::vector<Eigen::MatrixXcd> best_Y;
  double best_score = std::numeric_limits<double>::infinity();
  bool early_exit = false;
  int stall = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    sol.iterations = iter;

    Eigen::VectorXd rd = prob.c;  // c_i - sum_k <Y_k, Fi_k>
    double gap = 0.0;
    double dobj = 0.0;
    for (int k = 0; k < nblocks; ++k) {
      gap += real_inner(st[k].S, st[k].Y);
      dobj -= real_inner(st[k].Y, prob.blocks[k].F0);
      for (int i = 0; i < p; ++i) rd(i) -= real_inner(st[k].Y, prob.blocks[k].F[i]);
    }
    const double obj = prob.c.dot(sol.x);
    const double rd_rel = rd.cwiseAbs().maxCoeff() / c_scale;
    const double gap_rel = gap / (1.0 + std::abs(obj) + std::abs(dobj));
    const double score = std::max(rd_rel, gap_rel);

    if (obj < opts.stop_obj_below) {
      best_x = sol.x;
      best_Y.assign(nblocks, {});
      for (int k = 0; k < nblocks; ++k) best_Y[k] = st[k].Y;
      early_exit = true;
      break;
    }
    if (score < best_score) {
      best_score = score;
      best_x = sol.x;
      best_Y.assign(nblocks, {});
      for (int k = 0; k < nblocks; ++k) best_Y[k] = st[k].Y;
      stall = 0;
    } else if (++stall > 30) {
      break;
    }
    if (rd_rel <= opts.tol && gap_rel <= opts.tol) break;

    const double mu = gap / total_dim;

    // Nesterov-Todd scaling per block: with S = L L*, eigendecompose
    // L* Y L = Q diag(d) Q*; then W^{-1} = L^{-*} Q diag(sqrt d) Q* L^{-1}
    // satisfies W^{-1} S W^{-1} = Y.
    bool scaling_ok = true;
    for (int k = 0; k < nblocks; ++k) {
      st[k].lltY.compute(st[k].Y);
      if (st[k].lltY.info() != Eigen::Success) { scaling_ok = false; break; }
      const Eigen::MatrixXcd L = st[k].lltS.matrixL();
      Eigen::MatrixXcd mid = L.adjoint() * st[k].Y * L;
      hermitize(mid);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mid);
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0) {
        scaling_ok = false;
        break;
      }
      Eigen::VectorXd dq(es.eigenvalues().size());
      for (int i = 0; i < dq.size(); ++i) dq(i) = std::sqrt(es.eigenvalues()(i));
      const Eigen::MatrixXcd core =
          es.eigenvectors() * dq.asDiagonal() * es.eigenvectors().adjoint();
      Eigen::MatrixXcd li = L.triangularView<Eigen::Lower>().solve(
          Eigen::MatrixXcd::Identity(L.rows(), L.cols()));
      st[k].W_inv = li.adjoint() * core * li;
      hermitize(st[k].W_inv);
      st[k].S_inv = st[k].lltS.solve(Eigen::MatrixXcd::Identity(L.rows(), L.cols()));
      hermitize(st[k].S_inv);
    }
    if (!scaling_ok) break;

    // Schur complement M_ij = sum_k <Fi, W^{-1} Fj W^{-1}> and the
    // S^{-1}-weighted shift s_i = sum_k <Fi, S_k^{-1}>.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd s_shift = Eigen::VectorXd::Zero(p);
    for (int k = 0; k < nblocks; ++k) {
      std::vector<Eigen::MatrixXcd> G(p);
      for (int i = 0; i < p; ++i) {
        G[i] = st[k].W_inv * prob.blocks[k].F[i] * st[k].W_inv;
        s_shift(i) += real_inner(prob.blocks[k].F[i], st[k].S_inv);
      }
      for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
          const double v = real_inner(G[i], prob.blocks[k].F[j]);
          M(i, j) += v;
          if (j != i) M(j, i) += v;
        }
      }
    }
    M.diagonal().array() += 1e-13 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> mldlt(M);
    if (mldlt.info() != Eigen::Success) break;

    // Newton direction for centering weight gamma: M dx = gamma*s - c;
    // dS = sum_i dx_i Fi; dY = gamma S^{-1} - Y - W^{-1} dS W^{-1}.
    auto directions = [&](double gamma, Eigen::VectorXd& dx,
                          std::vector<Eigen::MatrixXcd>& dS,
                          std::vector<Eigen::MatrixXcd>& dY) {
      dx = mldlt.solve(gamma * s_shift - prob.c);
      dS.assign(nblocks, {});
      dY.assign(nblocks, {});
      for (int k = 0; k < nblocks; ++k) {
        dS[k] = Eigen::MatrixXcd::Zero(st[k].S.rows(), st[k].S.cols());
        for (int i = 0; i < p; ++i) {
          if (dx(i) != 0.0) dS[k] += dx(i) * prob.blocks[k].F[i];
        }
        hermitize(dS[k]);
        Eigen::MatrixXcd wdw = st[k].W_inv * dS[k] * st[k].W_inv;
        hermitize(wdw);
        dY[k] = gamma * st[k].S_inv - st[k].Y - wdw;
        hermitize(dY[k]);
      }
    };

    auto step_lengths = [&](const std::vector<Eigen::MatrixXcd>& dS,
                            const std::vector<Eigen::MatrixXcd>& dY, double& ap,
                            double& ad) {
      ap = ad = 1.0;
      for (int k = 0; k < nblocks; ++k) {
        ap = std::min(ap, opts.step_frac * max_step(st[k].lltS, dS[k]));
        ad = std::min(ad, opts.step_frac * max_step(st[k].lltY, dY[k]));
      }
    };

    // Predictor (gamma = 0) fixes the centering weight.
    Eigen::VectorXd dx_aff;
    std::vector<Eigen::MatrixXcd> dS_aff, dY_aff;
    directions(0.0, dx_aff, dS_aff, dY_aff);
    double ap_aff, ad_aff;
    step_lengths(dS_aff, dY_aff, ap_aff, ad_aff);
    ap_aff = std::min(ap_aff, 1.0);
    ad_aff = std::min(ad_aff, 1.0);
    double gap_aff = 0.0;
    for (int k = 0; k < nblocks; ++k) {
      gap_aff += real_inner(st[k].S + ap_aff * dS_aff[k], st[k].Y + ad_aff * dY_aff[k]);
    }
    gap_aff = std::max(gap_aff, 0.0);
    double sigma = std::pow(gap_aff / std::max(gap, 1e-300), 3.0);
    sigma = std::min(std::max(sigma, 1e-10), 0.999);

    // Corrector.
    Eigen::VectorXd dx;
    std::vector<Eigen::MatrixXcd> dS, dY;
    directions(sigma * mu, dx, dS, dY);
    double ap, ad;
    step_lengths(dS, dY, ap, ad);
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);
    if (!dx.allFinite() || ap <= 1e-14 || ad <= 1e-14) break;

    sol.x += ap * dx;
    bool ok = true;
    for (int k = 0; k < nblocks; ++k) {
      st[k].S = eval_block(prob.blocks[k], sol.x);
      st[k].Y += ad * dY[k];
      hermitize(st[k].Y);
      st[k].lltS.compute(st[k].S);
      if (st[k].lltS.info() != Eigen::Success) { ok = false; break; }
    }
    if (!ok) break;  // roundoff reached the boundary; keep the best iterate
  }

  sol.x = best_x;
  sol.Y = best_Y;
  sol.objective = prob.c.dot(sol.x);
  sol.dual_objective = 0.0;
  Eigen::VectorXd rd = prob.c;
  sol.gap = 0.0;
  sol.primal_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < nblocks; ++k) {
    const Eigen::MatrixXcd S = eval_block(prob.blocks[k], sol.x);
    sol.primal_margin = std::min(sol.primal_margin, lmi_detail::min_eig(S));
    if (!sol.Y.empty()) {
      sol.gap += real_inner(S, sol.Y[k]);
      sol.dual_objective -= real_inner(sol.Y[k], prob.blocks[k].F0);
      for (int i = 0; i < p; ++i) rd(i) -= real_inner(sol.Y[k], prob.blocks[k].F[i]);
    }
  }
  sol.dual_resid = sol.Y.empty() ? std::numeric_limits<double>::infinity()
                                 : rd.cwiseAbs().maxCoeff();
  const double gap_rel =
      sol.gap / (1.0 + std::abs(sol.objective) + std::abs(sol.dual_objective));
  const double rd_rel = sol.dual_resid / c_scale;
  sol.status = (early_exit || std::max(gap_rel, rd_rel) <= opts.grade_tol)
                   ? SolveStatus::optimal
                   : SolveStatus::numerical_failure;
  return sol;
}

struct Phase1Result {
  double margin = 0.0;  // -t at the returned point (positive means interior)
  Eigen::VectorXd x;
  LmiSolution aux;      // phase-1 solution; duals carry the certificate
};

// Minimizes t in A_k(x) + t I >= 0 starting from x = 0. Blocks flagged false
// in `shift_mask` do not receive the t shift and must be strictly feasible
// at x = 0 (box-bound blocks, Algorithm B's mu >= 0 row). Returns early once
// the margin reaches `want_margin`.
inline Phase1Result phase1(const LmiProblem& prob, const IpmOptions& opts = {},
                           double want_margin = 1e-3,
                           const std::vector<bool>& shift_mask = {}) {
  using namespace lmi_detail;
  const int p = prob.nvars;
  LmiProblem aux;
  aux.nvars = p + 1;
  aux.c = Eigen::VectorXd::Zero(p + 1);
  aux.c(p) = 1.0;
  double t0 = 0.0;
  for (std::size_t k = 0; k < prob.blocks.size(); ++k) {
    LmiBlock blk;
    blk.F0 = prob.blocks[k].F0;
    blk.F = prob.blocks[k].F;
    const bool shifted = shift_mask.empty() ? true : shift_mask[k];
    const auto dim = blk.F0.rows();
    blk.F.push_back(shifted ? Eigen::MatrixXcd::Identity(dim, dim)
                            : Eigen::MatrixXcd::Zero(dim, dim));
    if (shifted) {
      t0 = std::max(t0, -min_eig(blk.F0));
    } else if (min_eig(blk.F0) <= 0) {
      throw std::invalid_argument("phase1: unshifted block infeasible at x=0");
    }
    aux.blocks.push_back(std::move(blk));
  }
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p + 1);
  x0(p) = t0 + 1.0;

  IpmOptions aopts = opts;
  aopts.stop_obj_below = -want_margin;
  Phase1Result out;
  out.aux = ipm_minimize(aux, x0, aopts);
  out.x = out.aux.x.head(p);
  out.margin = -out.aux.x(p);
  return out;
}

// Validates a Farkas certificate against the original problem blocks:
// Y_k >= 0 (to tolerance), |sum_k <Y_k, Fi_k>| small, sum_k <Y_k, F0_k>
// strictly negative.
struct CertificateCheck {
  bool valid = false;
  double value = 0.0;  // -sum <Y, F0>
  double linear_resid = 0.0;
  double min_eig_Y = 0.0;
};

inline CertificateCheck check_certificate(const LmiProblem& prob,
                                          const std::vector<Eigen::MatrixXcd>& Y,
                                          double tol = 1e-7) {
  using namespace lmi_detail;
  CertificateCheck out;
  if (Y.size() != prob.blocks.size()) return out;
  out.min_eig_Y = std::numeric_limits<double>::infinity();
  double norm = 0.0;
  for (std::size_t k = 0; k < Y.size(); ++k) {
    out.min_eig_Y = std::min(out.min_eig_Y, min_eig(Y[k]));
    out.value -= real_inner(Y[k], prob.blocks[k].F0);
    norm += Y[k].norm();
  }
  for (int i = 0; i < prob.nvars; ++i) {
    double li = 0.0;
    for (std::size_t k = 0; k < Y.size(); ++k) {
      li += real_inner(Y[k], prob.blocks[k].F[i]);
    }
    out.linear_resid = std::max(out.linear_resid, std::abs(li));
  }
  const double scale = std::max(norm, 1e-300);
  out.valid = out.min_eig_Y >= -tol * scale && out.linear_resid <= tol * scale &&
              out.value > tol * scale;
  return out;
}

// solve_lmi contract: phase 1, then optimization from the interior point.
// Marginally feasible problems are relaxed by at most ~tol before phase 2,
// so returned points satisfy lambda_min(A_k(x)) >= -tol up to that margin.
inline LmiSolution solve_lmi(const LmiProblem& prob, double tol = 1e-7,
                             const std::vector<bool>& phase1_shift_mask = {}) {
  IpmOptions opts;
  opts.tol = std::max(tol * 0.02, 1e-12);
  opts.grade_tol = tol;

  const double feas_tol = std::max(tol, 1e-9);
  Phase1Result p1 = phase1(prob, opts, 1e-3, phase1_shift_mask);
  const double t_final = -p1.margin;

  if (t_final > feas_tol) {
    CertificateCheck cert = check_certificate(prob, p1.aux.Y, 1e-6);
    if (cert.valid) {
      LmiSolution sol;
      sol.status = SolveStatus::infeasible;
      sol.x = p1.x;
      sol.Y = p1.aux.Y;
      sol.cert_value = cert.value;
      sol.cert_resid = cert.linear_resid;
      sol.iterations = p1.aux.iterations;
      sol.primal_margin = p1.margin;
      return sol;
    }
    LmiSolution sol = p1.aux;
    sol.x = p1.x;
    sol.status = SolveStatus::numerical_failure;
    sol.primal_margin = p1.margin;
    return sol;
  }

  // Feasible, possibly only marginally: open an interior of width ~tol/2.
  LmiProblem work = prob;
  if (p1.margin <= 0.25 * feas_tol) {
    const double delta = std::max(0.0, t_final) + 0.5 * feas_tol;
    for (auto& blk : work.blocks) {
      blk.F0 += delta * Eigen::MatrixXcd::Identity(blk.F0.rows(), blk.F0.cols());
    }
  }
  return ipm_minimize(work, p1.x, opts);
}

}  // namespace hamlearn
