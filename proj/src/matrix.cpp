#include "hybridmm/matrix.hpp"

#include <stdexcept>
#include <string>

namespace hybridmm {

namespace {

void require_same_size(const Matrix& a, const Matrix& b, const char* op) {
  if (a.n() != b.n()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(a.n()) + " vs " + std::to_string(b.n()) + ")");
  }
}

}  // namespace

Matrix::Matrix(std::size_t n) : n_(n), data_(n * n) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows)
    : n_(rows.size()), data_() {
  data_.reserve(n_ * n_);
  for (const auto& row : rows) {
    if (row.size() != n_) throw std::invalid_argument("Matrix: rows must form a square");
    for (auto v : row) data_.emplace_back(v);
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = RingElem::one();
  return m;
}

Matrix Matrix::random(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> dist(0, static_cast<std::int64_t>(RingElem::modulus) - 1);
  Matrix m(n);
  for (auto& x : m.data_) x = RingElem(dist(rng));
  return m;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t h) const {
  Matrix out(h);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < h; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
  return out;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& src) {
  for (std::size_t i = 0; i < src.n(); ++i)
    for (std::size_t j = 0; j < src.n(); ++j) (*this)(r0 + i, c0 + j) = src(i, j);
}

Matrix Matrix::quadrant(int q) const {
  if (n_ % 2 != 0) throw std::invalid_argument("quadrant: odd dimension");
  const std::size_t h = n_ / 2;
  return block(static_cast<std::size_t>(q / 2) * h, static_cast<std::size_t>(q % 2) * h, h);
}

Matrix mat_add(const Matrix& a, const Matrix& b) {
  require_same_size(a, b, "mat_add");
  Matrix c(a.n());
  auto out = c.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return c;
}

Matrix mat_sub(const Matrix& a, const Matrix& b) {
  require_same_size(a, b, "mat_sub");
  Matrix c(a.n());
  auto out = c.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return c;
}

Matrix mat_mul_naive(const Matrix& a, const Matrix& b) {
  require_same_size(a, b, "mat_mul_naive");
  const std::size_t n = a.n();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RingElem acc;
      for (std::size_t k = 0; k < n; ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

Matrix pad_to_pow2(const Matrix& a) {
  if (is_pow2(a.n())) return a;
  Matrix out(next_pow2(a.n()));
  out.set_block(0, 0, a);
  return out;
}

Matrix truncate(const Matrix& a, std::size_t n) { return a.block(0, 0, n); }

}  // namespace hybridmm
