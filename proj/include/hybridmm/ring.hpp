#pragma once

#include <cstdint>
#include <ostream>

namespace hybridmm {

/// Element of the prime field Z/pZ. All arithmetic is exact; values are kept
/// canonical in [0, p).
template <std::uint64_t P>
class ModInt {
  static_assert(P > 1 && P < (std::uint64_t{1} << 32), "modulus must fit in 32 bits");

 public:
  static constexpr std::uint64_t modulus = P;

  constexpr ModInt() = default;
  constexpr ModInt(std::int64_t v) : value_(normalize(v)) {}  // NOLINT: implicit by intent

  constexpr std::uint64_t value() const { return value_; }

  static constexpr ModInt zero() { return ModInt(); }
  static constexpr ModInt one() { return ModInt(1); }

  constexpr ModInt& operator+=(ModInt o) {
    value_ += o.value_;
    if (value_ >= P) value_ -= P;
    return *this;
  }
  constexpr ModInt& operator-=(ModInt o) {
    value_ = value_ >= o.value_ ? value_ - o.value_ : value_ + P - o.value_;
    return *this;
  }
  constexpr ModInt& operator*=(ModInt o) {
    value_ = (value_ * o.value_) % P;
    return *this;
  }

  friend constexpr ModInt operator+(ModInt a, ModInt b) { return a += b; }
  friend constexpr ModInt operator-(ModInt a, ModInt b) { return a -= b; }
  friend constexpr ModInt operator*(ModInt a, ModInt b) { return a *= b; }
  friend constexpr ModInt operator-(ModInt a) { return ModInt() - a; }
  friend constexpr bool operator==(ModInt a, ModInt b) = default;

  friend std::ostream& operator<<(std::ostream& os, ModInt a) { return os << a.value_; }

 private:
  static constexpr std::uint64_t normalize(std::int64_t v) {
    std::int64_t r = v % static_cast<std::int64_t>(P);
    return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(P) : r);
  }

  std::uint64_t value_ = 0;
};

inline constexpr std::uint64_t kDefaultPrime = 2147483647;  // 2^31 - 1

using RingElem = ModInt<kDefaultPrime>;

}  // namespace hybridmm
