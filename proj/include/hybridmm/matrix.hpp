#pragma once

#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "hybridmm/ring.hpp"

namespace hybridmm {

/// Dense square matrix over RingElem, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n);
  Matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

  static Matrix identity(std::size_t n);
  static Matrix random(std::size_t n, std::mt19937_64& rng);

  std::size_t n() const { return n_; }

  RingElem& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  RingElem operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::span<const RingElem> data() const { return data_; }
  std::span<RingElem> data() { return data_; }

  /// Copy of the h x h block whose top-left corner is (r0, c0).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t h) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& src);

  /// Quadrant q in {0: (1,1), 1: (1,2), 2: (2,1), 3: (2,2)}; n must be even.
  Matrix quadrant(int q) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<RingElem> data_;
};

Matrix mat_add(const Matrix& a, const Matrix& b);
Matrix mat_sub(const Matrix& a, const Matrix& b);
Matrix mat_mul_naive(const Matrix& a, const Matrix& b);

/// Embeds a in the top-left corner of the smallest 2^k x 2^k zero matrix.
Matrix pad_to_pow2(const Matrix& a);

/// Top-left n x n block of a.
Matrix truncate(const Matrix& a, std::size_t n);

bool is_pow2(std::size_t v);
std::size_t next_pow2(std::size_t v);

}  // namespace hybridmm
