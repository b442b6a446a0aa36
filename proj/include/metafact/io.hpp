#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "metafact/matrix.hpp"

/// Matrix files and synthetic test matrices.
///
/// Readers report ParseError with the 1-based line number of the offending
/// line; a file that ends early reports the line after its last line.
namespace metafact::io {

/// Reads `%%MatrixMarket matrix array|coordinate real|integer general`.
/// Coordinate files are densified; m·n above 4·10⁶ is rejected on the size
/// line. Complex, pattern and symmetric variants throw UnsupportedFormat.
Matrix read_matrix_market(const std::filesystem::path& path);
Matrix parse_matrix_market(std::string_view text);

/// Writes `array real general`, column-major, one value per line, %.17g.
void write_matrix_market(const Matrix& m, const std::filesystem::path& path);
std::string format_matrix_market(const Matrix& m);

/// Comma-separated, no header, one row per line.
Matrix read_csv(const std::filesystem::path& path);
Matrix parse_csv(std::string_view text);
void write_csv(const Matrix& m, const std::filesystem::path& path);
std::string format_csv(const Matrix& m);

enum class SyntheticKind { RankK, DecayingGeometric, DecayingPolynomial, IdentityLike };

std::string_view kind_name(SyntheticKind kind) noexcept;

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::RankK;
  Index m = 0;
  Index n = 0;
  Index k = 0;         ///< rank_k only
  double decay = 0.0;  ///< ratio (geometric) or exponent (polynomial)
  std::uint64_t seed = 0;

  /// Throws InvalidSpec.
  void validate() const;
  /// Canonical `kind:MxN:key=val` form.
  std::string to_string() const;
};

/// Parses `kind:MxN[:key=val]...` with keys k, decay and seed, e.g.
/// `rank_k:20x15:k=5:seed=7`. decay defaults to 0.5 (geometric) or 1
/// (polynomial); seed defaults to `default_seed`. Throws InvalidSpec.
SyntheticSpec parse_synthetic_spec(std::string_view text, std::uint64_t default_seed = 0);

/// rank_k: (m x k Gaussian)·(k x n Gaussian). Decaying kinds: U·diag(σ)·Vᵀ
/// with U, V the Q factors of m x p and n x p Gaussians (p = min(m,n)) and
/// σ_j = decay^j (j = 0..p-1) or σ_j = j^(−decay) (j = 1..p).
/// identity_like: I_m(:, 1:n).
Matrix generate(const SyntheticSpec& spec);

}  // namespace metafact::io
