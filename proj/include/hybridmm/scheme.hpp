#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace hybridmm {

enum class SchemeId : std::uint8_t { Strassen, Winograd, Custom };

/// A 2x2-base fast multiplication scheme given by its coefficient matrices.
/// Quadrant order is (1,1), (1,2), (2,1), (2,2); products are M1..M7.
struct FastScheme {
  using EncodeMatrix = std::array<std::array<std::int8_t, 4>, 7>;
  using DecodeMatrix = std::array<std::array<std::int8_t, 7>, 4>;

  SchemeId id = SchemeId::Strassen;
  std::string name;
  EncodeMatrix encode_a{};
  EncodeMatrix encode_b{};
  DecodeMatrix decode{};

  static const FastScheme& strassen();
  static const FastScheme& winograd();

  /// Number of nonzero coefficients in row k of encode_a / encode_b.
  int nnz_a(int k) const;
  int nnz_b(int k) const;

  /// True when encoded operand k is the bare quadrant (a single +1 coefficient).
  /// Returns the quadrant index, or -1.
  int bare_quadrant_a(int k) const;
  int bare_quadrant_b(int k) const;

  friend bool operator==(const FastScheme& x, const FastScheme& y) {
    return x.id == y.id && x.name == y.name && x.encode_a == y.encode_a &&
           x.encode_b == y.encode_b && x.decode == y.decode;
  }
};

/// Looks up a built-in scheme by its plan-text name ("strassen", "winograd").
const FastScheme* find_scheme(std::string_view name);

/// Checks the scheme against the naive product on `trials` random 2x2 pairs.
bool scheme_is_correct(const FastScheme& scheme, int trials, std::uint64_t seed);

/// True when no two rows of either encoder have the same support.
bool encoders_have_distinct_rows(const FastScheme& scheme);

/// Reads a scheme from JSON: {"name": ..., "encode_a": [[..4]..7], "encode_b": ..., "decode": [[..7]..4]}.
FastScheme scheme_from_json(std::string_view text);
std::string scheme_to_json(const FastScheme& scheme);

}  // namespace hybridmm
