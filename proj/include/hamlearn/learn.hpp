#pragma once

// The two learning programs over an assembled EEB system.
//
// Algorithm A: guard on conditioning (C not PD or K > 1/eps0 returns the
// unbounded sentinel), then minimize/maximize v . lambda' subject to
//
//   logD + mu1 I + sum_a lambda'_a (H_a + H_a^dag)/2           >= 0
//   mu2 I -/+ i sum_a lambda'_a (H_a - H_a^dag)/2              >= 0   (both signs)
//
// with (mu1, mu2) from the a posteriori feasibility theorem. Algorithm B
// minimizes a single slack mu >= 0 replacing both mu1 and mu2.
//
// Decision variables carry box bounds |lambda'_a| <= lambda_box (default
// 10 * beta) so every program is compact; the box is reported and flagged
// when it binds.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hamlearn/eeb.hpp"
#include "hamlearn/lmi.hpp"
#include "hamlearn/parallel.hpp"

namespace hamlearn {

struct LearnOptions {
  double beta = 1.0;        // prior bound on max |lambda_alpha|
  double lambda_box = 0.0;  // 0 -> 10 * beta
  double tol = 1e-7;        // solver tolerance
  int threads = 1;          // directional solves run in parallel
  bool keep_certificates = false;

  double box() const { return lambda_box > 0 ? lambda_box : 10.0 * beta; }
};

// The three EEB blocks as Hermitian-affine maps of lambda'.
inline std::vector<LmiBlock> build_constraints(const EEBSystem& sys, double mu1,
                                               double mu2) {
  if (!sys.cond_ok) throw std::invalid_argument("build_constraints: system not PD");
  const int r = sys.r;
  const int m = sys.m;
  const Complex im(0.0, 1.0);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(r, r);

  LmiBlock b0, bplus, bminus;
  b0.F0 = sys.logD + mu1 * id;
  bplus.F0 = mu2 * id;
  bminus.F0 = mu2 * id;
  for (int a = 0; a < m; ++a) {
    Eigen::MatrixXcd hplus = 0.5 * (sys.H[a] + Eigen::MatrixXcd(sys.H[a].adjoint()));
    Eigen::MatrixXcd hminus = 0.5 * (sys.H[a] - Eigen::MatrixXcd(sys.H[a].adjoint()));
    lmi_detail::hermitize(hplus);
    b0.F.push_back(hplus);
    Eigen::MatrixXcd ih = -im * hminus;  // Hermitian since hminus is anti-Hermitian
    lmi_detail::hermitize(ih);
    bplus.F.push_back(ih);
    bminus.F.push_back(-ih);
  }
  return {b0, bplus, bminus};
}

namespace learn_detail {

// EEB blocks plus box rows; phase-1 shifts only the EEB blocks.
inline LmiProblem boxed_problem(std::vector<LmiBlock> blocks, int m, double box,
                                std::vector<bool>* shift_mask) {
  LmiProblem prob;
  prob.nvars = m;
  prob.c = Eigen::VectorXd::Zero(m);
  shift_mask->assign(blocks.size(), true);
  prob.blocks = std::move(blocks);
  for (int a = 0; a < m; ++a) {
    for (double sign : {1.0, -1.0}) {
      LmiBlock bound;
      bound.F0 = Eigen::MatrixXcd::Constant(1, 1, box);
      bound.F.assign(m, Eigen::MatrixXcd::Zero(1, 1));
      bound.F[a] = Eigen::MatrixXcd::Constant(1, 1, sign);
      prob.blocks.push_back(std::move(bound));
      shift_mask->push_back(false);
    }
  }
  return prob;
}

struct PreparedSet {
  bool infeasible = false;
  bool failed = false;
  LmiProblem work;          // possibly tol-relaxed blocks
  Eigen::VectorXd x0;       // strictly feasible start
  LmiSolution phase1_sol;   // duals carry the certificate when infeasible
  double cert_value = 0.0;
  double cert_resid = 0.0;
};

inline PreparedSet prepare(const LmiProblem& prob, const std::vector<bool>& shift_mask,
                           double tol) {
  PreparedSet out;
  IpmOptions opts;
  opts.tol = std::max(tol * 0.02, 1e-12);
  opts.grade_tol = tol;

  const double feas_tol = std::max(tol, 1e-9);
  Phase1Result p1 = phase1(prob, opts, 1e-3, shift_mask);
  const double t_final = -p1.margin;

  if (t_final > feas_tol) {
    CertificateCheck cert = check_certificate(prob, p1.aux.Y, 1e-6);
    out.phase1_sol = p1.aux;
    if (cert.valid) {
      out.infeasible = true;
      out.cert_value = cert.value;
      out.cert_resid = cert.linear_resid;
    } else {
      out.failed = true;
    }
    return out;
  }
  out.work = prob;
  if (p1.margin <= 0.25 * feas_tol) {
    const double delta = std::max(0.0, t_final) + 0.5 * feas_tol;
    for (auto& blk : out.work.blocks) {
      blk.F0 += delta * Eigen::MatrixXcd::Identity(blk.F0.rows(), blk.F0.cols());
    }
  }
  out.x0 = p1.x;
  out.phase1_sol = p1.aux;
  return out;
}

}  // namespace learn_detail

struct IntervalResult {
  std::vector<double> v;
  bool sentinel = false;  // guard tripped: interval is (-inf, +inf)
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();
  SolveStatus status_min = SolveStatus::numerical_failure;
  SolveStatus status_max = SolveStatus::numerical_failure;
  bool box_active = false;
  int iterations = 0;
  double worst_gap = 0.0;
  std::vector<double> lambda_at_min, lambda_at_max;
};

struct InfeasibilityCertificate {
  std::vector<Eigen::MatrixXcd> Y;  // one multiplier per constraint block
  double value = 0.0;               // -sum <Y, F0> > 0
  double linear_resid = 0.0;
};

struct LearnOutcome {
  bool guard_tripped = false;  // C not PD or K > 1/eps0
  double K = 0.0;
  double mu1 = 0.0, mu2 = 0.0;
  double lambda_box = 0.0;
  std::vector<IntervalResult> intervals;
  std::optional<InfeasibilityCertificate> certificate;
  bool infeasible = false;
};

namespace learn_detail {

inline IntervalResult optimize_direction(const PreparedSet& prep,
                                         const std::vector<double>& v, double box,
                                         double tol) {
  IntervalResult res;
  res.v = v;
  const int m = prep.work.nvars;
  IpmOptions opts;
  opts.tol = std::max(tol * 0.02, 1e-12);
  opts.grade_tol = tol;

  LmiProblem prob = prep.work;
  prob.c = Eigen::VectorXd::Map(v.data(), m);
  LmiSolution lo = ipm_minimize(prob, prep.x0, opts);
  prob.c = -prob.c;
  LmiSolution hi = ipm_minimize(prob, prep.x0, opts);

  res.status_min = lo.status;
  res.status_max = hi.status;
  res.a = lo.objective;
  res.b = -hi.objective;
  res.iterations = lo.iterations + hi.iterations;
  res.worst_gap = std::max(lo.gap, hi.gap);
  res.lambda_at_min.assign(lo.x.data(), lo.x.data() + m);
  res.lambda_at_max.assign(hi.x.data(), hi.x.data() + m);
  for (int a = 0; a < m; ++a) {
    if (std::abs(lo.x(a)) >= box - 1e-6 || std::abs(hi.x(a)) >= box - 1e-6) {
      res.box_active = true;
    }
  }
  return res;
}

}  // namespace learn_detail

// Algorithm A for a batch of directions. One conditioning guard and one
// feasibility phase serve every direction; the 2|directions| solves are
// independent.
inline LearnOutcome algorithm_a_multi(const EEBSystem& sys,
                                      const std::vector<std::vector<double>>& directions,
                                      double epsilon0, const LearnOptions& opts = {}) {
  LearnOutcome out;
  out.K = sys.K;
  out.lambda_box = opts.box();
  if (!sys.cond_ok || epsilon0 * sys.K > 1.0) {
    out.guard_tripped = true;
    for (const auto& v : directions) {
      IntervalResult res;
      res.v = v;
      res.sentinel = true;
      out.intervals.push_back(std::move(res));
    }
    return out;
  }

  const RelaxationParams mu = relaxation_params(sys.K, epsilon0, sys.m, opts.beta);
  out.mu1 = mu.mu1;
  out.mu2 = mu.mu2;

  std::vector<bool> shift_mask;
  const LmiProblem base = learn_detail::boxed_problem(
      build_constraints(sys, mu.mu1, mu.mu2), sys.m, out.lambda_box, &shift_mask);
  const learn_detail::PreparedSet prep = learn_detail::prepare(base, shift_mask, opts.tol);

  if (prep.infeasible) {
    out.infeasible = true;
    InfeasibilityCertificate cert;
    cert.Y = prep.phase1_sol.Y;
    cert.value = prep.cert_value;
    cert.linear_resid = prep.cert_resid;
    out.certificate = std::move(cert);
    for (const auto& v : directions) {
      IntervalResult res;
      res.v = v;
      res.status_min = res.status_max = SolveStatus::infeasible;
      res.a = std::numeric_limits<double>::quiet_NaN();
      res.b = std::numeric_limits<double>::quiet_NaN();
      out.intervals.push_back(std::move(res));
    }
    return out;
  }
  if (prep.failed) {
    for (const auto& v : directions) {
      IntervalResult res;
      res.v = v;
      res.status_min = res.status_max = SolveStatus::numerical_failure;
      out.intervals.push_back(std::move(res));
    }
    return out;
  }

  out.intervals.resize(directions.size());
  parallel_for(
      static_cast<int>(directions.size()),
      [&](int i) {
        out.intervals[i] = learn_detail::optimize_direction(prep, directions[i],
                                                            out.lambda_box, opts.tol);
      },
      opts.threads);
  return out;
}

// Algorithm A for a single direction v.
inline LearnOutcome algorithm_a(const EEBSystem& sys, const std::vector<double>& v,
                                double epsilon0, const LearnOptions& opts = {}) {
  if (static_cast<int>(v.size()) != sys.m) {
    throw std::invalid_argument("algorithm_a: direction size mismatch");
  }
  return algorithm_a_multi(sys, {v}, epsilon0, opts);
}

// Per-coefficient intervals: the 2m signed basis directions (each solve
// returns both the minimum and the maximum along +e_alpha).
inline LearnOutcome coefficient_intervals(const EEBSystem& sys, double epsilon0,
                                          const LearnOptions& opts = {}) {
  std::vector<std::vector<double>> dirs;
  for (int a = 0; a < sys.m; ++a) {
    std::vector<double> v(sys.m, 0.0);
    v[a] = 1.0;
    dirs.push_back(std::move(v));
  }
  return algorithm_a_multi(sys, dirs, epsilon0, opts);
}

struct AlgorithmBResult {
  SolveStatus status = SolveStatus::numerical_failure;
  double mu_star = 0.0;
  std::vector<double> lambda_star;
  int iterations = 0;
  double gap = 0.0;
};

// min mu >= 0 s.t. the EEB blocks hold with mu1 = mu2 = mu. Always feasible;
// solved directly from the interior point (0, ||logD|| + 1).
inline AlgorithmBResult algorithm_b(const EEBSystem& sys, const LearnOptions& opts = {}) {
  if (!sys.cond_ok) throw std::invalid_argument("algorithm_b: system not PD");
  const int m = sys.m;
  const int r = sys.r;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(r, r);

  std::vector<LmiBlock> blocks = build_constraints(sys, 0.0, 0.0);
  LmiProblem prob;
  prob.nvars = m + 1;
  prob.c = Eigen::VectorXd::Zero(m + 1);
  prob.c(m) = 1.0;
  for (auto& blk : blocks) {
    blk.F.push_back(id);
    prob.blocks.push_back(std::move(blk));
  }
  LmiBlock mu_nonneg;  // mu >= 0, stated explicitly
  mu_nonneg.F0 = Eigen::MatrixXcd::Zero(1, 1);
  mu_nonneg.F.assign(m + 1, Eigen::MatrixXcd::Zero(1, 1));
  mu_nonneg.F[m] = Eigen::MatrixXcd::Constant(1, 1, 1.0);
  prob.blocks.push_back(std::move(mu_nonneg));
  const double box = opts.box();
  for (int a = 0; a < m; ++a) {
    for (double sign : {1.0, -1.0}) {
      LmiBlock bound;
      bound.F0 = Eigen::MatrixXcd::Constant(1, 1, box);
      bound.F.assign(m + 1, Eigen::MatrixXcd::Zero(1, 1));
      bound.F[a] = Eigen::MatrixXcd::Constant(1, 1, sign);
      prob.blocks.push_back(std::move(bound));
    }
  }

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(m + 1);
  x0(m) = spectral_norm(sys.logD) + 1.0;
  IpmOptions iopts;
  iopts.tol = std::max(opts.tol * 0.02, 1e-12);
  iopts.grade_tol = opts.tol;
  LmiSolution sol = ipm_minimize(prob, x0, iopts);

  AlgorithmBResult out;
  out.status = sol.status;
  out.mu_star = std::max(sol.x(m), 0.0);
  out.lambda_star.assign(sol.x.data(), sol.x.data() + m);
  out.iterations = sol.iterations;
  out.gap = sol.gap;
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization. Sentinel intervals are encoded as an explicit
// status, never as JSON infinities.
// ---------------------------------------------------------------------------

inline nlohmann::json interval_to_json(const IntervalResult& res) {
  nlohmann::json j;
  j["v"] = res.v;
  if (res.sentinel) {
    j["status"] = "unbounded";
    return j;
  }
  if (res.status_min == SolveStatus::infeasible) {
    j["status"] = "infeasible";
    return j;
  }
  j["status"] = (res.status_min == SolveStatus::optimal &&
                 res.status_max == SolveStatus::optimal)
                    ? "optimal"
                    : "numerical_failure";
  j["a"] = res.a;
  j["b"] = res.b;
  j["box_active"] = res.box_active;
  j["iterations"] = res.iterations;
  j["gap"] = res.worst_gap;
  return j;
}

inline nlohmann::json outcome_to_json(const LearnOutcome& out,
                                      bool dump_certificate = false) {
  nlohmann::json j;
  j["K"] = out.K;
  j["guard_tripped"] = out.guard_tripped;
  j["mu1"] = out.mu1;
  j["mu2"] = out.mu2;
  j["lambda_box"] = out.lambda_box;
  j["infeasible"] = out.infeasible;
  j["directions"] = nlohmann::json::array();
  for (const auto& res : out.intervals) j["directions"].push_back(interval_to_json(res));
  if (out.certificate) {
    j["certificate"] = {{"value", out.certificate->value},
                        {"linear_resid", out.certificate->linear_resid}};
    if (dump_certificate) {
      j["certificate"]["Y"] = nlohmann::json::array();
      for (const auto& y : out.certificate->Y) {
        j["certificate"]["Y"].push_back(matrix_to_json(y));
      }
    }
  }
  return j;
}

}  // namespace hamlearn
