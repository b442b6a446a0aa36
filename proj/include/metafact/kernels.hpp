#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "metafact/matrix.hpp"

/// Dense primitives consumed by every other module: Householder QR (plain and
/// column-pivoted), one-sided Jacobi SVD, LU with partial pivoting,
/// triangular solves, SVD-based pseudoinverse and reduced row echelon form.
///
/// All routines are deterministic. Triangular factors carry hard zeros below
/// (or above) the diagonal.
namespace metafact::kernels {

using Permutation = std::vector<Index>;

struct QrFactors {
  Matrix q;          ///< m x min(m,n), or m x m in full mode
  Matrix r;          ///< min(m,n) x n, or m x n in full mode; diag(r) >= 0
  Permutation perm;  ///< a(:, perm) = q * r

  /// The permutation as an n x n matrix Π with a·Π = q·r.
  Matrix perm_matrix() const;
};

struct SvdFactors {
  Matrix u;  ///< m x p, p = min(m,n)
  Vector s;  ///< non-increasing, non-negative
  Matrix v;  ///< n x p
};

struct LuFactors {
  Matrix l;          ///< unit lower triangular
  Matrix u;          ///< upper triangular
  Permutation perm;  ///< row i of l*u is row perm[i] of the input
};

enum class Side { Left, Right };
enum class UpLo { Upper, Lower };

/// Householder QR. With `pivot`, columns are chosen greedily by largest
/// remaining norm (ties go to the lowest index) so |r(i,i)| is non-increasing.
QrFactors qr(const Matrix& a, bool pivot = false, bool full = false);

SvdFactors svd(const Matrix& a);

/// Singular values only.
Vector singular_values(const Matrix& a);

/// Count of singular values above rtol * s_max; rtol defaults to max(m,n)*eps.
Index numerical_rank(const Matrix& a, std::optional<double> rtol = std::nullopt);
Index numerical_rank(const Vector& s, Index m, Index n, std::optional<double> rtol = std::nullopt);

LuFactors lu(const Matrix& a);

/// Solves a·x = b using precomputed factors; SingularTriangular on a zero pivot.
Matrix lu_solve(const LuFactors& f, const Matrix& b);

/// Smallest |u(i,i)| relative to ‖u‖_max; 0 for an exactly singular factor.
double lu_min_pivot_ratio(const LuFactors& f);

/// Moore-Penrose pseudoinverse v·diag(s⁺)·uᵀ, keeping s_i > rtol * s_max.
Matrix pinv(const Matrix& a, std::optional<double> rtol = std::nullopt);

struct RrefResult {
  Matrix echelon;
  std::vector<Index> pivots;
};

/// Gauss-Jordan elimination with partial pivoting. Entries with magnitude at
/// most pivot_tol are flushed to exact zero. Demonstration grade: the result
/// is sensitive to pivot_tol for ill-conditioned input.
RrefResult rref(const Matrix& a, std::optional<double> pivot_tol = std::nullopt);

/// rref with the default pivot_tol, but an entry also counts as zero while it
/// is within a running bound on the rounding error the elimination has put
/// into it. Used where the pivot count is read as a rank.
RrefResult rref_rank_revealing(const Matrix& a);

/// Solves r·x = b (Left) or x·r = b (Right) for triangular r.
Matrix solve_triangular(const Matrix& r, const Matrix& b, Side side, UpLo uplo);

}  // namespace metafact::kernels
