#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "ptlab/common.hpp"

namespace ptlab {

inline constexpr int kMaxBits = 32;

/// Computational-basis label of an n-qubit register, packed into one word.
///
/// Bit i holds qubit i. Spin convention: bit value 0 maps to s = +1 and bit
/// value 1 maps to s = -1.
class BitString {
public:
  BitString() = default;

  BitString(std::uint32_t bits, int n) : bits_(bits), n_(n) {
    require(n >= 1 && n <= kMaxBits, "BitString: length must be in [1, 32]");
    require(n == kMaxBits || (bits >> n) == 0, "BitString: bits set above length");
  }

  static BitString all_ones(int n) {
    return {n == kMaxBits ? 0xffffffffu : ((1u << n) - 1u), n};
  }

  /// Parses a string written most significant qubit first, e.g. "1010" has
  /// qubits 1 and 3 set.
  static BitString parse(std::string_view text) {
    const int n = static_cast<int>(text.size());
    require(n >= 1 && n <= kMaxBits, "BitString::parse: length must be in [1, 32]");
    std::uint32_t bits = 0;
    for (char c : text) {
      require(c == '0' || c == '1', "BitString::parse: expected only '0' and '1'");
      bits = (bits << 1) | static_cast<std::uint32_t>(c == '1');
    }
    return {bits, n};
  }

  std::uint32_t bits() const { return bits_; }
  int size() const { return n_; }
  std::uint64_t index() const { return bits_; }

  bool bit(int i) const { return (bits_ >> i) & 1u; }
  int spin(int i) const { return bit(i) ? -1 : 1; }

  BitString flipped(int i) const { return {bits_ ^ (1u << i), n_}; }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(n_), '0');
    for (int i = 0; i < n_; ++i) {
      if (bit(i)) s[static_cast<std::size_t>(n_ - 1 - i)] = '1';
    }
    return s;
  }

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString&, const BitString&) = default;

private:
  std::uint32_t bits_ = 0;
  int n_ = 1;
};

inline int hamming(BitString a, BitString b) {
  require(a.size() == b.size(), "hamming: length mismatch");
  return std::popcount(a.bits() ^ b.bits());
}

inline int hamming(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

}  // namespace ptlab
