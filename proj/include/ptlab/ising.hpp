#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "ptlab/bitstring.hpp"
#include "ptlab/common.hpp"

namespace ptlab {

inline constexpr int kMaxEnumerationBits = 24;

/// Two-local diagonal form  E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j.
///
/// Used for classical energies in the z basis and, evaluated on x-basis
/// labels, for transverse drivers.
struct IsingCoefficients {
  int n = 0;
  std::vector<double> h;  // n
  std::vector<double> J;  // n*n, symmetric, zero diagonal

  IsingCoefficients() = default;
  explicit IsingCoefficients(int n_) : n(n_), h(n_, 0.0), J(static_cast<std::size_t>(n_) * n_, 0.0) {}

  double coupling(int i, int j) const { return J[static_cast<std::size_t>(i) * n + j]; }

  void set_coupling(int i, int j, double value) {
    J[static_cast<std::size_t>(i) * n + j] = value;
    J[static_cast<std::size_t>(j) * n + i] = value;
  }

  bool has_couplings() const {
    for (double v : J)
      if (v != 0.0) return true;
    return false;
  }

  double energy(std::uint64_t z) const {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const double si = ((z >> i) & 1u) ? -1.0 : 1.0;
      e += h[i] * si;
      for (int j = i + 1; j < n; ++j) {
        const double sj = ((z >> j) & 1u) ? -1.0 : 1.0;
        e += coupling(i, j) * si * sj;
      }
    }
    return e;
  }

  /// Energy change when spin i is flipped from configuration z.
  double flip_delta(std::uint64_t z, int i) const {
    const double si = ((z >> i) & 1u) ? -1.0 : 1.0;
    double field = h[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      field += coupling(i, j) * (((z >> j) & 1u) ? -1.0 : 1.0);
    }
    return -2.0 * si * field;
  }

  /// Energies of all 2^n configurations, indexed by z. Gray-code sweep with
  /// running local fields, O(2^n n).
  std::vector<double> all_energies() const {
    require(n >= 1 && n <= kMaxEnumerationBits, "all_energies: n out of range for enumeration");
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> out(count);
    std::vector<double> field(h);  // local field h_i + sum_j J_ij s_j
    std::vector<double> s(n, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) field[i] += coupling(i, j);
    double e = energy(0);
    out[0] = e;
    std::uint64_t gray = 0;
    for (std::uint64_t k = 1; k < count; ++k) {
      const int i = std::countr_zero(k);
      e += -2.0 * s[i] * field[i];
      s[i] = -s[i];
      for (int j = 0; j < n; ++j)
        if (j != i) field[j] += 2.0 * s[i] * coupling(i, j);
      gray ^= std::uint64_t{1} << i;
      out[gray] = e;
    }
    return out;
  }
};

/// In-place normalized Walsh-Hadamard transform over n qubits.
template <class T>
void walsh_hadamard(std::span<T> v) {
  const std::size_t size = v.size();
  require(std::has_single_bit(size), "walsh_hadamard: length must be a power of two");
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += 2 * half) {
      for (std::size_t k = block; k < block + half; ++k) {
        const T a = v[k];
        const T b = v[k + half];
        v[k] = a + b;
        v[k + half] = a - b;
      }
    }
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(size));
  for (auto& x : v) x *= norm;
}

}  // namespace ptlab
