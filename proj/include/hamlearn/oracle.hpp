#pragma once

// Exact Gibbs states by dense diagonalization, and the noisy estimate layer
// omega-tilde. Every tabulated estimate stays within epsilon0 of the exact
// value, whatever the noise mode; the structural normalizations
// omega(1) = 1, |omega(P_i P_j)| <= 1, |omega(P_i [E,P_j])| <= 2 are enforced
// by construction (identity estimates are exact, out-of-range draws are
// clipped radially).

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hamlearn/model.hpp"
#include "hamlearn/pauli.hpp"
#include "hamlearn/tables.hpp"

namespace hamlearn {

struct GibbsState {
  int n = 0;
  Eigen::MatrixXcd rho;       // PSD, trace one, faithful
  double log_partition = 0.0; // log Tr e^{-h}
  double beta = 0.0;          // max_alpha |lambda_alpha| of the generating h
};

inline Eigen::MatrixXcd dense_hamiltonian(const HamiltonianModel& model,
                                          const std::vector<double>& lambda,
                                          int cap = kDefaultDenseCap) {
  if (static_cast<int>(lambda.size()) != model.m()) {
    throw std::invalid_argument("dense_hamiltonian: coefficient count mismatch");
  }
  const std::size_t dim = std::size_t{1} << model.n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int a = 0; a < model.m(); ++a) {
    if (!std::isfinite(lambda[a])) {
      throw std::invalid_argument("dense_hamiltonian: non-finite coefficient");
    }
    if (lambda[a] != 0.0) h += lambda[a] * to_dense(model.terms[a], cap);
  }
  return h;
}

// rho = e^{-h} / Tr e^{-h} via Hermitian eigendecomposition, with the
// smallest exponent shifted out for stability.
inline GibbsState build_gibbs(const HamiltonianModel& model,
                              const std::vector<double>& lambda,
                              int cap = kDefaultDenseCap) {
  if (model.n > cap) {
    throw std::invalid_argument("build_gibbs: qubit count exceeds dense cap");
  }
  const Eigen::MatrixXcd h = dense_hamiltonian(model, lambda, cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("build_gibbs: eigensolver failed");
  const Eigen::VectorXd e = es.eigenvalues();
  const double e_min = e.minCoeff();
  Eigen::VectorXd w(e.size());
  for (int i = 0; i < e.size(); ++i) w(i) = std::exp(-(e(i) - e_min));
  const double z_shifted = w.sum();
  w /= z_shifted;
  GibbsState state;
  state.n = model.n;
  state.rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  state.rho = 0.5 * (state.rho + Eigen::MatrixXcd(state.rho.adjoint()));
  state.log_partition = std::log(z_shifted) - e_min;
  for (double l : lambda) state.beta = std::max(state.beta, std::abs(l));
  return state;
}

inline Complex expect(const GibbsState& state, const Eigen::MatrixXcd& a) {
  if (a.rows() != state.rho.rows() || a.cols() != state.rho.cols()) {
    throw std::invalid_argument("expect: dimension mismatch");
  }
  return (state.rho * a).trace();
}

// Exact Pauli expectations with memoization on the (x,z) masks.
// tr(rho X^x Z^z) = sum_b rho_{b, b^x} (-1)^{z.b}, evaluated directly on the
// stored density matrix; phases multiply back in afterwards.
class PauliExpectations {
 public:
  explicit PauliExpectations(const GibbsState& state) : state_(&state) {}

  Complex value(const PauliString& p) {
    if (p.n() != state_->n) throw std::invalid_argument("expect: qubit count mismatch");
    const PauliKey key{p.x_mask(), p.z_mask()};
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, bare_value(p.x_mask(), p.z_mask())).first;
    }
    return i_power(p.phase()) * it->second;
  }

  const GibbsState& state() const { return *state_; }

 private:
  Complex bare_value(std::uint64_t x, std::uint64_t z) const {
    const int n = state_->n;
    auto to_index_mask = [&](std::uint64_t m) {
      std::uint64_t out = 0;
      for (int q = 0; q < n; ++q) {
        if (m & PauliString::bit(q)) out |= std::uint64_t{1} << (n - 1 - q);
      }
      return out;
    };
    const std::uint64_t xi = to_index_mask(x);
    const std::uint64_t zi = to_index_mask(z);
    const std::uint64_t dim = std::uint64_t{1} << n;
    Complex acc = 0.0;
    for (std::uint64_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(zi & b) % 2 == 0) ? 1.0 : -1.0;
      acc += sign * state_->rho(b, b ^ xi);
    }
    return acc;
  }

  const GibbsState* state_;
  std::map<PauliKey, Complex> cache_;
};

inline Complex expect(const GibbsState& state, const PauliString& p) {
  PauliExpectations table(state);
  return table.value(p);
}

// ---------------------------------------------------------------------------
// Noise layer
// ---------------------------------------------------------------------------

enum class NoiseMode { exact, uniform_adversarial, gaussian_clipped, shots };

inline std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::exact: return "exact";
    case NoiseMode::uniform_adversarial: return "uniform_adversarial";
    case NoiseMode::gaussian_clipped: return "gaussian_clipped";
    case NoiseMode::shots: return "shots";
  }
  return "exact";
}

inline NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "exact") return NoiseMode::exact;
  if (s == "uniform_adversarial") return NoiseMode::uniform_adversarial;
  if (s == "gaussian_clipped") return NoiseMode::gaussian_clipped;
  if (s == "shots") return NoiseMode::shots;
  throw std::invalid_argument("unknown noise mode: " + s);
}

struct NoiseSpec {
  NoiseMode mode = NoiseMode::exact;
  double epsilon0 = 0.0;
  std::uint64_t seed = 0;
  std::int64_t shot_count = 0;  // required in shots mode
};

inline void validate_noise(const NoiseSpec& noise) {
  if (noise.epsilon0 < 0) throw std::invalid_argument("noise: epsilon0 < 0");
  if (!std::isfinite(noise.epsilon0)) throw std::invalid_argument("noise: epsilon0 not finite");
  if (noise.mode == NoiseMode::shots && noise.shot_count < 1) {
    throw std::invalid_argument("noise: shots mode needs shot_count >= 1");
  }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t v) {
  v += 0x9E3779B97F4A7C15ull;
  v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
  v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
  return v ^ (v >> 31);
}

// One independent stream per observable, keyed on the canonical id
// (kind, alpha, i, j). Evaluation order and parallelism cannot change draws.
inline std::mt19937_64 observable_rng(std::uint64_t seed, char kind, int alpha,
                                      int i, int j) {
  std::uint64_t h = splitmix64(seed ^ 0xA0761D6478BD642Full);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  h = splitmix64(h ^ static_cast<std::uint64_t>(alpha + 1));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32 |
                      static_cast<std::uint64_t>(static_cast<std::uint32_t>(j))));
  return std::mt19937_64(h);
}

inline Complex clip_to_ball(Complex value, Complex center, double radius, bool& clipped) {
  const Complex d = value - center;
  const double dist = std::abs(d);
  if (dist <= radius) return value;
  clipped = true;
  if (radius <= 0.0) return center;
  return center + d * (radius / dist);
}

inline Complex clip_magnitude(Complex value, double bound, bool& clipped) {
  const double mag = std::abs(value);
  if (mag <= bound) return value;
  clipped = true;
  return value * (bound / mag);
}

// Sample mean of shot_count +-1 outcomes for a Hermitian Pauli with exact
// expectation t in [-1,1].
inline double shot_estimate(double t, std::int64_t shots, std::mt19937_64& rng) {
  const double p = std::min(1.0, std::max(0.0, 0.5 * (1.0 + t)));
  std::binomial_distribution<std::int64_t> dist(shots, p);
  const std::int64_t up = dist(rng);
  return 2.0 * static_cast<double>(up) / static_cast<double>(shots) - 1.0;
}

}  // namespace detail

// Noisy estimate of one tabulated observable A = scale * W, where W is a
// PauliString (so ||A|| = scale). Identity observables are structural and
// emitted exactly; all other draws end clipped into the epsilon0-ball around
// the truth and onto |estimate| <= scale.
inline Complex noisy_observable_estimate(PauliExpectations& exact, const PauliString& w,
                                         double scale, const NoiseSpec& noise,
                                         char kind, int alpha, int i, int j,
                                         int* clipped) {
  const Complex truth = scale * exact.value(w);
  if (noise.mode == NoiseMode::exact || w.is_identity_op()) return truth;

  auto rng = detail::observable_rng(noise.seed, kind, alpha, i, j);
  bool did_clip = false;
  Complex est = truth;
  switch (noise.mode) {
    case NoiseMode::uniform_adversarial: {
      // Worst-case draw on the boundary of the epsilon0-ball.
      std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
      const double th = angle(rng);
      est = truth + noise.epsilon0 * Complex(std::cos(th), std::sin(th));
      break;
    }
    case NoiseMode::gaussian_clipped: {
      std::normal_distribution<double> g(0.0, noise.epsilon0 / 3.0);
      est = truth + Complex(g(rng), g(rng));
      break;
    }
    case NoiseMode::shots: {
      // W = i^c V with V canonical Hermitian; measure V in +-1 outcomes.
      const double v_truth = exact.value(w.canonicalized()).real();
      const double v_hat = detail::shot_estimate(v_truth, noise.shot_count, rng);
      est = scale * i_power(w.phase_rel_canonical()) * v_hat;
      break;
    }
    case NoiseMode::exact: break;
  }
  est = detail::clip_to_ball(est, truth, noise.epsilon0, did_clip);
  est = detail::clip_magnitude(est, scale, did_clip);
  if (did_clip && clipped) ++*clipped;
  return est;
}

// Builds the full expectation table for a perturber set and Hamiltonian
// terms. C is estimated once per unordered pair (the conjugate fills the
// mirror entry, so Ctilde is Hermitian entrywise); B entries are estimated
// per ordered (i, alpha, j). Pauli commutators either vanish identically or
// equal 2 E P, so vanishing entries are structural zeros, not measurements.
inline ExpectationTable measure_tables(const GibbsState& state,
                                       const std::vector<PauliString>& perturbers,
                                       const std::vector<PauliString>& terms,
                                       const NoiseSpec& noise) {
  validate_noise(noise);
  const int r = static_cast<int>(perturbers.size());
  const int m = static_cast<int>(terms.size());
  ExpectationTable table;
  table.r = r;
  table.m = m;
  table.epsilon0 = noise.epsilon0;
  table.noise_mode = to_string(noise.mode);
  table.seed = noise.seed;
  table.C = Eigen::MatrixXcd::Zero(r, r);
  table.B.assign(m, Eigen::MatrixXcd::Zero(r, r));

  PauliExpectations exact(state);
  for (int i = 0; i < r; ++i) {
    for (int j = i; j < r; ++j) {
      const PauliString pq = multiply(perturbers[i], perturbers[j]);
      const Complex est = noisy_observable_estimate(exact, pq, 1.0, noise, 'C', -1,
                                                    i, j, &table.clipped_count);
      table.C(i, j) = est;
      table.C(j, i) = std::conj(est);
    }
  }
  for (int a = 0; a < m; ++a) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        if (commutes(terms[a], perturbers[j])) continue;  // [E,P] = 0 exactly
        const PauliString w = multiply(perturbers[i], multiply(terms[a], perturbers[j]));
        table.B[a](i, j) = noisy_observable_estimate(exact, w, 2.0, noise, 'B', a,
                                                     i, j, &table.clipped_count);
      }
    }
  }
  return table;
}

}  // namespace hamlearn
