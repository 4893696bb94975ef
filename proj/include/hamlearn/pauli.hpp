#pragma once

// n-qubit Pauli strings in the symplectic (bit-mask) representation.
//
// A PauliString stores two n-bit masks (x, z) and an integer phase exponent
// p in {0,1,2,3}; the operator it denotes is
//
//     i^p * prod_q X_q^{x_q} Z_q^{z_q}
//
// with qubit 0 the leftmost letter / most significant tensor factor.
// Products and commutators are evaluated exactly on the masks, so phases
// never pass through floating point.

#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hamlearn {

using Complex = std::complex<double>;

inline constexpr int kDefaultDenseCap = 12;

inline Complex i_power(int p) {
  switch (((p % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

class PauliString {
 public:
  PauliString() : n_(0), x_(0), z_(0), phase_(0) {}

  // Identity on n qubits.
  explicit PauliString(int n) : n_(n), x_(0), z_(0), phase_(0) { check_n(n); }

  PauliString(int n, std::uint64_t x, std::uint64_t z, int phase)
      : n_(n), x_(x), z_(z), phase_(((phase % 4) + 4) % 4) {
    check_n(n);
    const std::uint64_t allowed = mask_bits(n);
    if ((x & ~allowed) != 0 || (z & ~allowed) != 0) {
      throw std::invalid_argument("PauliString: mask has bits beyond qubit count");
    }
  }

  // Parses a fixed-length letter string over {I,X,Y,Z}, e.g. "ZZII".
  // The result is the Hermitian operator with leading coefficient +1.
  static PauliString from_string(const std::string& letters) {
    if (letters.empty() || letters.size() > 64) {
      throw std::invalid_argument("PauliString: string length must be in [1,64]");
    }
    std::uint64_t x = 0, z = 0;
    int phase = 0;
    for (std::size_t q = 0; q < letters.size(); ++q) {
      switch (letters[q]) {
        case 'I': break;
        case 'X': x |= bit(q); break;
        case 'Y': x |= bit(q); z |= bit(q); phase += 1;  // Y = i XZ
          break;
        case 'Z': z |= bit(q); break;
        default:
          throw std::invalid_argument(std::string("PauliString: invalid letter '") +
                                      letters[q] + "'");
      }
    }
    return PauliString(static_cast<int>(letters.size()), x, z, phase);
  }

  int n() const { return n_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  int phase() const { return phase_; }

  bool is_identity_op() const { return x_ == 0 && z_ == 0; }

  // Number of qubits acted on nontrivially.
  int weight() const { return std::popcount(x_ | z_); }

  std::vector<int> support() const {
    std::vector<int> out;
    std::uint64_t s = x_ | z_;
    for (int q = 0; q < n_; ++q) {
      if (s & bit(q)) out.push_back(q);
    }
    return out;
  }

  std::uint64_t support_mask() const { return x_ | z_; }

  // Phase exponent that makes the letters-only operator Hermitian with
  // coefficient +1 (one factor of i per Y).
  int canonical_phase() const { return std::popcount(x_ & z_) % 4; }

  bool is_hermitian() const {
    return ((phase_ - std::popcount(x_ & z_)) % 2 + 2) % 2 == 0;
  }

  bool is_canonical_hermitian() const { return phase_ == canonical_phase(); }

  // Same masks, phase reset to the canonical Hermitian value.
  PauliString canonicalized() const { return PauliString(n_, x_, z_, canonical_phase()); }

  // Coefficient relative to the canonical letters form: this = i^k * letters.
  int phase_rel_canonical() const { return ((phase_ - canonical_phase()) % 4 + 4) % 4; }

  PauliString adjoint() const {
    return PauliString(n_, x_, z_, (4 - phase_ + 2 * std::popcount(x_ & z_)) % 4);
  }

  std::string letters() const {
    std::string out(static_cast<std::size_t>(n_), 'I');
    for (int q = 0; q < n_; ++q) {
      const bool xb = x_ & bit(q), zb = z_ & bit(q);
      if (xb && zb) out[q] = 'Y';
      else if (xb) out[q] = 'X';
      else if (zb) out[q] = 'Z';
    }
    return out;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.n_ == b.n_ && a.x_ == b.x_ && a.z_ == b.z_ && a.phase_ == b.phase_;
  }

  static std::uint64_t bit(std::size_t q) { return std::uint64_t{1} << q; }

 private:
  static void check_n(int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("PauliString: n must be in [1,64]");
  }
  static std::uint64_t mask_bits(int n) {
    return n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  }

  int n_;
  std::uint64_t x_;
  std::uint64_t z_;
  int phase_;
};

// dense(p)*dense(q), phase tracked exactly:
// (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{z1.x2} X^{x1^x2} Z^{z1^z2}.
inline PauliString multiply(const PauliString& p, const PauliString& q) {
  if (p.n() != q.n()) throw std::invalid_argument("multiply: qubit counts differ");
  const int phase =
      p.phase() + q.phase() + 2 * std::popcount(p.z_mask() & q.x_mask());
  return PauliString(p.n(), p.x_mask() ^ q.x_mask(), p.z_mask() ^ q.z_mask(), phase);
}

// True iff the dense commutator vanishes; symplectic form of the masks.
inline bool commutes(const PauliString& p, const PauliString& q) {
  if (p.n() != q.n()) throw std::invalid_argument("commutes: qubit counts differ");
  const int form = std::popcount(p.x_mask() & q.z_mask()) +
                   std::popcount(p.z_mask() & q.x_mask());
  return form % 2 == 0;
}

// Dense realization as a 2^n x 2^n matrix. X^x Z^z maps |b> to
// (-1)^{z.b} |b^x>, so each column holds a single entry. Qubit q sits at
// index bit (n-1-q), matching the Kronecker order of the letter string.
inline Eigen::MatrixXcd to_dense(const PauliString& p, int cap = kDefaultDenseCap) {
  if (p.n() > cap) {
    throw std::invalid_argument("to_dense: qubit count exceeds dense cap (" +
                                std::to_string(cap) + ")");
  }
  const int n = p.n();
  const std::size_t dim = std::size_t{1} << n;
  auto to_index_mask = [&](std::uint64_t m) {
    std::uint64_t out = 0;
    for (int q = 0; q < n; ++q) {
      if (m & PauliString::bit(q)) out |= std::uint64_t{1} << (n - 1 - q);
    }
    return out;
  };
  const std::uint64_t xi = to_index_mask(p.x_mask());
  const std::uint64_t zi = to_index_mask(p.z_mask());
  const Complex scale = i_power(p.phase());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint64_t b = 0; b < dim; ++b) {
    const double sign = (std::popcount(zi & b) % 2 == 0) ? 1.0 : -1.0;
    out(b ^ xi, b) = scale * sign;
  }
  return out;
}

// Canonical ordering used everywhere a perturbing-operator list is built:
// lexicographic on (sorted support, letter string). The identity precedes
// every other string.
inline bool canonical_less(const PauliString& a, const PauliString& b) {
  const auto sa = a.support(), sb = b.support();
  if (sa != sb) return sa < sb;
  return a.letters() < b.letters();
}

struct PauliKey {
  std::uint64_t x, z;
  friend bool operator<(const PauliKey& a, const PauliKey& b) {
    return a.x != b.x ? a.x < b.x : a.z < b.z;
  }
  friend bool operator==(const PauliKey& a, const PauliKey& b) {
    return a.x == b.x && a.z == b.z;
  }
};

inline PauliKey key_of(const PauliString& p) { return {p.x_mask(), p.z_mask()}; }

}  // namespace hamlearn
