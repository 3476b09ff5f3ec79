#pragma once

#include "hpgcn/graph.hpp"
#include "hpgcn/types.hpp"

namespace hpgcn {

// Eigendecomposition of the normalized Laplacian: graph frequencies in
// ascending order and the orthonormal Fourier basis U (one eigenvector per
// column). Zero-degree nodes contribute exact (1, e_i) pairs.
struct EigenBasis {
  Vector lambdas;
  Matrix u;

  Index n() const { return lambdas.size(); }
};

// Dense exact path, O(n^3); for oracles and spectrum analysis, capped by
// max_nodes. Solved block-wise per connected component, then merged in
// ascending eigenvalue order. Eigenvector signs are fixed by making the
// largest-magnitude entry positive.
EigenBasis dense_eigendecompose(const SparseAdjacency& adj,
                                Index max_nodes = 4096);

// xhat = U^T x
Vector gft(const EigenBasis& basis, const Vector& x);

// x = U xhat
Vector igft(const EigenBasis& basis, const Vector& xhat);

// Polynomial filter in the monomial basis: response sum_k theta[k] lambda^k,
// k = 0..K-1.
struct FilterCoefficients {
  Vector theta;

  explicit FilterCoefficients(Vector t) : theta(std::move(t)) {
    if (theta.size() < 1)
      throw std::invalid_argument("filter needs at least one coefficient");
  }

  Index order() const { return theta.size(); }

  // theta = e_k: the pure L^k high-pass exemplar.
  static FilterCoefficients monomial(Index k, Index size);
};

// h(lambda) evaluated pointwise on a grid.
Vector frequency_response(const FilterCoefficients& coeffs,
                          const Vector& lambda_grid);

// y = U g(Lambda) U^T x; exact spectral route.
Vector apply_spectral_filter(const EigenBasis& basis,
                             const FilterCoefficients& coeffs,
                             const Vector& x);

// y = sum_k theta[k] L^k x by repeated matvec; no eigendecomposition. Must
// agree with apply_spectral_filter on any graph the dense path can handle.
Vector apply_spatial_filter(const SparseAdjacency& adj,
                            const DegreeVector& deg,
                            const FilterCoefficients& coeffs, const Vector& x);

// exp(-(lambda-center)^2 / (2 width^2)); the fixed band-pass used only by the
// spectrum command's filter-shape comparison.
Vector gaussian_bandpass_response(const Vector& lambda_grid, Scalar center,
                                  Scalar width);

struct SpectrumReport {
  Vector lambdas;
  Vector magnitudes;  // |xhat_i|
  Scalar cutoff = 0.0;
  Scalar energy_above_cutoff = 0.0;  // fraction of total energy at lambda > cutoff
  bool zero_signal = false;          // all-zero input; fractions defined as 0

  // Fraction of signal energy strictly above `c`.
  Scalar energy_above(Scalar c) const;
};

// Per-frequency magnitudes of x in the GFT basis plus the high-frequency
// energy fraction at the given cutoff (must lie in [0, 2]).
SpectrumReport spectral_energy_profile(const EigenBasis& basis,
                                       const Vector& x, Scalar cutoff);

}  // namespace hpgcn
