#include "hybridmm/scheme.hpp"

#include <random>
#include <set>
#include <stdexcept>

#include "hybridmm/matrix.hpp"
#include "json.hpp"

namespace hybridmm {

namespace {

FastScheme make_strassen() {
  FastScheme s;
  s.id = SchemeId::Strassen;
  s.name = "strassen";
  //              A11 A12 A21 A22
  s.encode_a = {{{1, 0, 0, 1},     // M1 = (A11 + A22)(B11 + B22)
                 {0, 0, 1, 1},     // M2 = (A21 + A22) B11
                 {1, 0, 0, 0},     // M3 = A11 (B12 - B22)
                 {0, 0, 0, 1},     // M4 = A22 (B21 - B11)
                 {1, 1, 0, 0},     // M5 = (A11 + A12) B22
                 {-1, 0, 1, 0},    // M6 = (A21 - A11)(B11 + B12)
                 {0, 1, 0, -1}}};  // M7 = (A12 - A22)(B21 + B22)
  s.encode_b = {{{1, 0, 0, 1},
                 {1, 0, 0, 0},
                 {0, 1, 0, -1},
                 {-1, 0, 1, 0},
                 {0, 0, 0, 1},
                 {1, 1, 0, 0},
                 {0, 0, 1, 1}}};
  //             M1  M2 M3 M4  M5 M6 M7
  s.decode = {{{1, 0, 0, 1, -1, 0, 1},    // C11
               {0, 0, 1, 0, 1, 0, 0},     // C12
               {0, 1, 0, 1, 0, 0, 0},     // C21
               {1, -1, 1, 0, 0, 1, 0}}};  // C22
  return s;
}

// Strassen-Winograd variant with the intermediate sums S1..S4, T1..T4 and
// U2..U4 expanded into flat coefficient rows.
FastScheme make_winograd() {
  FastScheme s;
  s.id = SchemeId::Winograd;
  s.name = "winograd";
  s.encode_a = {{{1, 0, 0, 0},      // A11
                 {0, 1, 0, 0},      // A12
                 {1, 1, -1, -1},    // S4 = A12 - S2
                 {0, 0, 0, 1},      // A22
                 {0, 0, 1, 1},      // S1 = A21 + A22
                 {-1, 0, 1, 1},     // S2 = S1 - A11
                 {1, 0, -1, 0}}};   // S3 = A11 - A21
  s.encode_b = {{{1, 0, 0, 0},      // B11
                 {0, 0, 1, 0},      // B21
                 {0, 0, 0, 1},      // B22
                 {1, -1, -1, 1},    // T4 = T2 - B21
                 {-1, 1, 0, 0},     // T1 = B12 - B11
                 {1, -1, 0, 1},     // T2 = B22 - T1
                 {0, -1, 0, 1}}};   // T3 = B22 - B12
  s.decode = {{{1, 1, 0, 0, 0, 0, 0},
               {1, 0, 1, 0, 1, 1, 0},
               {1, 0, 0, -1, 0, 1, 1},
               {1, 0, 0, 0, 1, 1, 1}}};
  return s;
}

int nnz(const std::array<std::int8_t, 4>& row) {
  int c = 0;
  for (auto v : row) c += v != 0;
  return c;
}

int bare(const std::array<std::int8_t, 4>& row) {
  if (nnz(row) != 1) return -1;
  for (int q = 0; q < 4; ++q)
    if (row[q] == 1) return q;
  return -1;
}

template <std::size_t R, std::size_t C>
std::array<std::array<std::int8_t, C>, R> read_coeffs(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("scheme json: missing '") + key + "'");
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.size() != R)
    throw std::invalid_argument(std::string("scheme json: '") + key + "' must have " +
                                std::to_string(R) + " rows");
  std::array<std::array<std::int8_t, C>, R> out{};
  for (std::size_t r = 0; r < R; ++r) {
    if (!rows[r].is_array() || rows[r].size() != C)
      throw std::invalid_argument(std::string("scheme json: row ") + std::to_string(r) + " of '" +
                                  key + "' must have " + std::to_string(C) + " entries");
    for (std::size_t c = 0; c < C; ++c) {
      int v = rows[r][c].get<int>();
      if (v < -1 || v > 1) throw std::invalid_argument("scheme json: coefficients must be in {-1,0,1}");
      out[r][c] = static_cast<std::int8_t>(v);
    }
  }
  return out;
}

}  // namespace

const FastScheme& FastScheme::strassen() {
  static const FastScheme s = make_strassen();
  return s;
}

const FastScheme& FastScheme::winograd() {
  static const FastScheme s = make_winograd();
  return s;
}

int FastScheme::nnz_a(int k) const { return nnz(encode_a[k]); }
int FastScheme::nnz_b(int k) const { return nnz(encode_b[k]); }
int FastScheme::bare_quadrant_a(int k) const { return bare(encode_a[k]); }
int FastScheme::bare_quadrant_b(int k) const { return bare(encode_b[k]); }

const FastScheme* find_scheme(std::string_view name) {
  if (name == "strassen") return &FastScheme::strassen();
  if (name == "winograd") return &FastScheme::winograd();
  return nullptr;
}

bool scheme_is_correct(const FastScheme& scheme, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    Matrix a = Matrix::random(2, rng);
    Matrix b = Matrix::random(2, rng);
    std::array<RingElem, 7> m;
    for (int k = 0; k < 7; ++k) {
      RingElem x, y;
      for (int q = 0; q < 4; ++q) {
        x += RingElem(scheme.encode_a[k][q]) * a(q / 2, q % 2);
        y += RingElem(scheme.encode_b[k][q]) * b(q / 2, q % 2);
      }
      m[k] = x * y;
    }
    Matrix c(2);
    for (int q = 0; q < 4; ++q) {
      RingElem acc;
      for (int k = 0; k < 7; ++k) acc += RingElem(scheme.decode[q][k]) * m[k];
      c(q / 2, q % 2) = acc;
    }
    if (!(c == mat_mul_naive(a, b))) return false;
  }
  return true;
}

bool encoders_have_distinct_rows(const FastScheme& scheme) {
  auto distinct = [](const FastScheme::EncodeMatrix& e) {
    std::set<unsigned> supports;
    for (const auto& row : e) {
      unsigned mask = 0;
      for (int q = 0; q < 4; ++q)
        if (row[q] != 0) mask |= 1u << q;
      if (!supports.insert(mask).second) return false;
    }
    return true;
  };
  return distinct(scheme.encode_a) && distinct(scheme.encode_b);
}

FastScheme scheme_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("scheme json: ") + e.what());
  }
  FastScheme s;
  s.id = SchemeId::Custom;
  s.name = j.value("name", std::string("custom"));
  s.encode_a = read_coeffs<7, 4>(j, "encode_a");
  s.encode_b = read_coeffs<7, 4>(j, "encode_b");
  s.decode = read_coeffs<4, 7>(j, "decode");
  return s;
}

std::string scheme_to_json(const FastScheme& scheme) {
  nlohmann::json j;
  j["name"] = scheme.name;
  j["encode_a"] = scheme.encode_a;
  j["encode_b"] = scheme.encode_b;
  j["decode"] = scheme.decode;
  return j.dump(2);
}

}  // namespace hybridmm
