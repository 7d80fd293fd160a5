#ifndef EIGENSR_SPECLIN_HPP_
#define EIGENSR_SPECLIN_HPP_

#include <vector>

#include "eigensr/image.hpp"
#include "eigensr/matrix.hpp"
#include "eigensr/rng.hpp"

namespace eigensr {

/// Spectral basis and singular values of a bands x pixels matrix.
///
/// `basis` is square (bands x bands) with orthonormal columns ordered by
/// descending singular value. Sign convention: in each column the entry of
/// largest magnitude is nonnegative (ties broken by lowest row index).
struct SpectralDecomposition {
  Matrix basis;                        // L x L
  std::vector<double> singular_values; // length L, descending, >= 0

  int bands() const { return basis.rows; }
};

/// Channel-major stack of spatial coefficient images. Channel i is the
/// i-th basis column's projection of the source matrix, reshaped to
/// height x width. Values are signed and unbounded.
struct EigenimageStack {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;  // channels x (height*width)

  int pixels() const { return height * width; }
  double *channel(int i) { return data.data() + static_cast<size_t>(i) * pixels(); }
  const double *channel(int i) const { return data.data() + static_cast<size_t>(i) * pixels(); }
  Image channel_image(int i) const;
};

/// Thin SVD of y (bands x pixels), returning the left factor and singular
/// values. Computed from the bands x bands Gram matrix with a cyclic Jacobi
/// eigensolver; rank-deficient directions are completed to an orthonormal
/// basis. Rejects non-finite, empty, and all-zero input.
SpectralDecomposition spectral_svd(const Matrix &y);

/// First `rank` coefficient images of y under dec's basis (1 <= rank <= bands).
EigenimageStack project(const Matrix &y, int height, int width,
                        const SpectralDecomposition &dec, int rank);

/// Maps a coefficient stack back to the band domain: basis[:, :R] * E.
Matrix reconstruct(const EigenimageStack &stack, const SpectralDecomposition &dec);

/// Number of leading channels whose cumulative singular-value mass stays
/// within tau: p = max{ j : cumsum(sigma)_j / sum(sigma) <= tau }, floored
/// at 1. sigma must be descending, nonnegative, not all zero; tau in (0, 1].
int channel_cutoff(const std::vector<double> &sigma, double tau);

/// Uniform channel index in [0, p); p >= 1.
int sample_channel(int p, Rng &rng);

}  // namespace eigensr

#endif
