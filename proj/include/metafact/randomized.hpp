#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "metafact/core.hpp"
#include "metafact/random.hpp"

/// Randomized and selection-based low-rank constructions: generalized
/// Nyström with row-space oversampling, CUR with two anchor choices, and the
/// Wedderburn rank-one reduction.
namespace metafact::randomized {

/// Sketch sizes: Ω_c is n x k, Ω_r is m x (k + oversample).
struct SketchConfig {
  Index k = 1;
  /// Extra columns in Ω_r; defaults to k for a total width of 2k.
  std::optional<Index> oversample_rows;
  std::uint64_t seed = 0;

  Index oversample() const noexcept { return oversample_rows.value_or(k); }
  Index row_width() const noexcept { return k + oversample(); }
  /// Throws InvalidArgument unless 1 <= k <= n and k + oversample <= m.
  void validate(Index m, Index n) const;
};

/// Draws Ω_c (n x k) and then Ω_r (m x (k+p)) from one generator seeded with
/// cfg.seed, so both Nyström paths see the same sketches.
core::SketchPair draw_sketches(Index m, Index n, const SketchConfig& cfg);

/// A ≈ (AΩ_c R⁻¹)(QᵀΩ_rᵀA) with Ω_rᵀAΩ_c = QR (thin, unpivoted). The
/// result has f = AΩ_c, h = AᵀΩ_r and the k x (k+p) mixing matrix R⁻¹Qᵀ.
/// residual_rel is measured on the stabilized product.
/// Throws ZeroMatrix for a = 0 and RankDeficientAnchor when R is singular.
core::MetaFactorization generalized_nystrom(const Matrix& a, const SketchConfig& cfg);

/// The direct formula AΩ_c(Ω_rᵀAΩ_c)⁺Ω_rᵀA through the SVD pseudoinverse.
Matrix nystrom_unstable(const Matrix& a, const SketchConfig& cfg);

enum class CurMode { Orthogonal, Interpolative };

std::string_view mode_name(CurMode mode) noexcept;

/// a ≈ c·u_mix·r with c = a(:, col_idx) and r = a(row_idx, :) copied verbatim.
struct CurFactors {
  Matrix c;
  Matrix u_mix;
  Matrix r;
  std::vector<Index> col_idx;
  std::vector<Index> row_idx;
  CurMode mode = CurMode::Orthogonal;

  Matrix reconstruct() const { return (c * u_mix) * r; }
};

/// u_mix = (BᵀC)⁺·BᵀAD·(RD)⁺. Orthogonal mode uses B = C, D = Rᵀ (so
/// u_mix = C⁺AR⁺); interpolative mode uses the selection matrices
/// B = I_m(:, I), D = I_n(:, J) (so u_mix = A(I,J)⁺).
/// Throws IndexOutOfRange, DuplicateIndex, or InvalidArgument when |I| != |J|.
CurFactors cur(const Matrix& a, const std::vector<Index>& row_idx, const std::vector<Index>& col_idx,
               CurMode mode);

/// Draws I then J uniformly without replacement and calls cur.
CurFactors cur_random_naive(const Matrix& a, Index k, std::uint64_t seed,
                            CurMode mode = CurMode::Orthogonal);

struct WedderburnStep {
  Vector u_r;  ///< length n
  Vector v_r;  ///< length m
  double g_r = 0.0;
  /// (row, col) for the default complete-pivoting rule; empty for hook steps.
  std::optional<std::pair<Index, Index>> pivot;
};

/// Caller-supplied directions (u_r, v_r) for step r given the current A_r.
using DirectionHook = std::function<std::pair<Vector, Vector>(const Matrix& a_r, Index step)>;

struct WedderburnResult {
  std::vector<WedderburnStep> steps;
  /// F = [A₁u₁, ...], G = diag(g)⁻¹, H = [A₁ᵀv₁, ...].
  core::MetaFactorization meta;
  /// A_{s+1} after the last step.
  Matrix remainder;
};

/// Default tolerance 64·max(m,n)·ε·‖a‖_max.
double default_pivot_tol(const Matrix& a);

/// A_{r+1} = A_r − A_r·u_r·v_rᵀ·A_r / g_r until ‖A_r‖_max <= pivot_tol or
/// max_steps. Without a hook, u_r = e_j and v_r = e_i at the largest |A_r(i,j)|
/// (first in row-major order on ties). Throws PivotBreakdown when
/// |v_rᵀA_r u_r| <= pivot_tol while ‖A_r‖_max > pivot_tol.
WedderburnResult wedderburn_reduce(const Matrix& a, Index max_steps,
                                   std::optional<double> pivot_tol = std::nullopt,
                                   const DirectionHook& hook = {});

struct RankReductionReport {
  double f_defect = 0.0;  ///< ‖AΩ_c − F‖ / ‖F‖ with Ω_c = A⁺F
  double h_defect = 0.0;  ///< ‖AᵀΩ_r − H‖ / ‖H‖ with Ω_r = (Aᵀ)⁺H
  double g_defect = 0.0;  ///< ‖Ω_rᵀAΩ_c − G⁻¹‖ / ‖G⁻¹‖
  Index rank_a = 0;
  Index rank_fgh = 0;
  Index rank_residual = 0;
  bool rank_identity = false;
  double tolerance = 1e-8;
  bool holds = false;
};

/// Checks that Ω_c, Ω_r exist with F = AΩ_c, H = AᵀΩ_r, G⁻¹ = Ω_rᵀAΩ_c, and
/// that rank(A − FGHᵀ) = rank(A) − rank(FGHᵀ). Ranks count singular values
/// above tolerance·σ_max(A). Throws SingularMixing when g is singular.
RankReductionReport verify_rank_reduction_conditions(const Matrix& a, const Matrix& f, const Matrix& g,
                                                     const Matrix& h);

}  // namespace metafact::randomized
