#pragma once

// Assembly of the constraint system behind the learning SDPs:
//   D = C^{-1/2} C^T C^{-1/2},  H_alpha = C^{-1/2} B_alpha C^{-1/2},
// the conditioning constant K = 2r ||C^{-1}||, and the relaxation slacks
// (mu1, mu2) that make the true coefficients feasible under noise.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "hamlearn/tables.hpp"

namespace hamlearn {

struct EEBSystem {
  int r = 0;
  int m = 0;
  bool cond_ok = false;      // C was accepted as positive definite
  double eigen_floor = 0.0;  // smallest eigenvalue of C
  double K = 0.0;            // 2r ||C^{-1}||, spectral norm
  Eigen::MatrixXcd D;        // Hermitian positive definite when cond_ok
  Eigen::MatrixXcd logD;     // principal logarithm of D
  std::vector<Eigen::MatrixXcd> H;
  double epsilon0 = 0.0;     // carried over from the table
};

// Smallest C eigenvalue below pd_tolerance = 1e-10 * r declares the system
// not positive definite; downstream algorithms then return the unbounded
// sentinel rather than raising.
inline double pd_tolerance(int r) { return 1e-10 * static_cast<double>(r); }

inline EEBSystem assemble(const ExpectationTable& table) {
  const int r = table.r;
  if (r < 1) throw std::invalid_argument("assemble: empty table");
  EEBSystem sys;
  sys.r = r;
  sys.m = table.m;
  sys.epsilon0 = table.epsilon0;

  // One Hermitian eigendecomposition of C backs the inverse square root;
  // one of D backs the logarithm.
  const Eigen::MatrixXcd C = 0.5 * (table.C + Eigen::MatrixXcd(table.C.adjoint()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C);
  if (es.info() != Eigen::Success) throw std::runtime_error("assemble: eigensolver failed");
  sys.eigen_floor = es.eigenvalues().minCoeff();
  if (sys.eigen_floor <= pd_tolerance(r)) {
    sys.cond_ok = false;
    return sys;
  }
  sys.cond_ok = true;
  sys.K = 2.0 * r / sys.eigen_floor;

  Eigen::VectorXd inv_sqrt(r);
  for (int i = 0; i < r; ++i) inv_sqrt(i) = 1.0 / std::sqrt(es.eigenvalues()(i));
  const Eigen::MatrixXcd c_inv_sqrt =
      es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();

  sys.D = c_inv_sqrt * C.transpose() * c_inv_sqrt;
  sys.D = 0.5 * (sys.D + Eigen::MatrixXcd(sys.D.adjoint()));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esd(sys.D);
  if (esd.info() != Eigen::Success) throw std::runtime_error("assemble: eigensolver failed");
  Eigen::VectorXd logs(r);
  for (int i = 0; i < r; ++i) {
    const double ev = esd.eigenvalues()(i);
    if (ev <= 0) throw std::runtime_error("assemble: D not positive definite");
    logs(i) = std::log(ev);
  }
  sys.logD = esd.eigenvectors() * logs.asDiagonal() * esd.eigenvectors().adjoint();
  sys.logD = 0.5 * (sys.logD + Eigen::MatrixXcd(sys.logD.adjoint()));

  sys.H.reserve(table.m);
  for (const auto& B : table.B) sys.H.push_back(c_inv_sqrt * B * c_inv_sqrt);
  return sys;
}

struct RelaxationParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
};

// mu1 = (2K^3 + 3 m beta K^2) eps0,  mu2 = 3 m beta K^2 eps0. beta is the
// caller's prior bound on max |lambda_alpha|.
inline RelaxationParams relaxation_params(double K, double epsilon0, int m, double beta) {
  if (K <= 0 || epsilon0 < 0) throw std::invalid_argument("relaxation_params: bad input");
  RelaxationParams out;
  out.mu2 = 3.0 * m * beta * K * K * epsilon0;
  out.mu1 = 2.0 * K * K * K * epsilon0 + out.mu2;
  return out;
}

// A priori error threshold for trace-orthonormal perturbers,
// sigma = e^{-m beta} d / 3r: if eps0 <= sigma then K <= 1/sigma.
inline double sigma_general(int m, double beta, int d, int r) {
  if (m < 1 || d < 1 || r < 1) throw std::invalid_argument("sigma_general: bad input");
  return std::exp(-static_cast<double>(m) * beta) * d / (3.0 * r);
}

// Conservative variant of the same threshold: the normalized bound
// rho >= e^{-2 m beta} / d gives C >= e^{-2 m beta} without the factor d.
inline double sigma_conservative(int m, double beta, int r) {
  if (m < 1 || r < 1) throw std::invalid_argument("sigma_conservative: bad input");
  return std::exp(-2.0 * static_cast<double>(m) * beta) / (3.0 * r);
}

struct ContinuityReport {
  bool applicable = false;    // requires eps0 <= 1/K of the noisy system
  double K = 0.0;             // noisy-system K
  double logD_deviation = 0.0;
  double logD_bound = 0.0;    // 2 K^3 eps0
  bool logD_ok = false;
  double H_deviation = 0.0;   // max over alpha
  double H_bound = 0.0;       // 3 K^2 eps0
  bool H_ok = false;
};

inline double spectral_norm(const Eigen::MatrixXcd& a) {
  return a.jacobiSvd().singularValues()(0);
}

inline ContinuityReport continuity_report(const EEBSystem& exact,
                                          const EEBSystem& noisy, double epsilon0) {
  if (exact.r != noisy.r || exact.m != noisy.m) {
    throw std::invalid_argument("continuity_report: systems do not match");
  }
  ContinuityReport rep;
  rep.K = noisy.K;
  if (!exact.cond_ok || !noisy.cond_ok || epsilon0 * noisy.K > 1.0) return rep;
  rep.applicable = true;
  rep.logD_deviation = spectral_norm(exact.logD - noisy.logD);
  rep.logD_bound = 2.0 * std::pow(noisy.K, 3) * epsilon0;
  rep.logD_ok = rep.logD_deviation <= rep.logD_bound;
  for (int a = 0; a < exact.m; ++a) {
    rep.H_deviation = std::max(rep.H_deviation, spectral_norm(exact.H[a] - noisy.H[a]));
  }
  rep.H_bound = 3.0 * noisy.K * noisy.K * epsilon0;
  rep.H_ok = rep.H_deviation <= rep.H_bound;
  return rep;
}

// ---------------------------------------------------------------------------
// JSON dump (row-major [re, im] pairs) for solver handoff and goldens.
// ---------------------------------------------------------------------------

inline nlohmann::json matrix_to_json(const Eigen::MatrixXcd& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      row.push_back({a(i, j).real(), a(i, j).imag()});
    }
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  const auto cols = rows ? j.at(0).size() : 0;
  Eigen::MatrixXcd a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t jj = 0; jj < cols; ++jj) {
      a(i, jj) = {j.at(i).at(jj).at(0).get<double>(), j.at(i).at(jj).at(1).get<double>()};
    }
  }
  return a;
}

inline nlohmann::json system_to_json(const EEBSystem& sys) {
  nlohmann::json j;
  j["r"] = sys.r;
  j["m"] = sys.m;
  j["cond_ok"] = sys.cond_ok;
  j["eigen_floor"] = sys.eigen_floor;
  j["K"] = sys.K;
  j["epsilon0"] = sys.epsilon0;
  if (sys.cond_ok) {
    j["D"] = matrix_to_json(sys.D);
    j["logD"] = matrix_to_json(sys.logD);
    j["H"] = nlohmann::json::array();
    for (const auto& h : sys.H) j["H"].push_back(matrix_to_json(h));
  }
  return j;
}

inline EEBSystem system_from_json(const nlohmann::json& j) {
  EEBSystem sys;
  sys.r = j.at("r").get<int>();
  sys.m = j.at("m").get<int>();
  sys.cond_ok = j.at("cond_ok").get<bool>();
  sys.eigen_floor = j.at("eigen_floor").get<double>();
  sys.K = j.at("K").get<double>();
  sys.epsilon0 = j.at("epsilon0").get<double>();
  if (sys.cond_ok) {
    sys.D = matrix_from_json(j.at("D"));
    sys.logD = matrix_from_json(j.at("logD"));
    for (const auto& h : j.at("H")) sys.H.push_back(matrix_from_json(h));
  }
  return sys;
}

}  // namespace hamlearn
