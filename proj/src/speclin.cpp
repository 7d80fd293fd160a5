#include "eigensr/speclin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace eigensr {
namespace {

constexpr double kJacobiTol = 1e-12;   // off-diagonal threshold, relative to trace
constexpr int kMaxSweeps = 64;
constexpr double kZeroSigma = 1e-12;   // relative to sigma_1

double max_off_diagonal(const Matrix &a) {
  double m = 0.0;
  for (int p = 0; p < a.rows; ++p)
    for (int q = p + 1; q < a.cols; ++q) m = std::max(m, std::fabs(a.at(p, q)));
  return m;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. On return `a` is
// (numerically) diagonal and the columns of `v` are the eigenvectors.
void jacobi_eigen(Matrix &a, Matrix &v) {
  const int n = a.rows;
  v = Matrix(n, n);
  for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;

  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += std::fabs(a.at(i, i));
  const double threshold = kJacobiTol * std::max(trace, 1e-300);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (max_off_diagonal(a) <= threshold) return;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) <= threshold * 1e-3) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = a.at(p, p), aqq = a.at(q, q);
        a.at(p, p) = app - t * apq;
        a.at(q, q) = aqq + t * apq;
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = a.at(r, p), arq = a.at(r, q);
            a.at(r, p) = arp - s * (arq + tau * arp);
            a.at(p, r) = a.at(r, p);
            a.at(r, q) = arq + s * (arp - tau * arq);
            a.at(q, r) = a.at(r, q);
          }
          const double vrp = v.at(r, p), vrq = v.at(r, q);
          v.at(r, p) = vrp - s * (vrq + tau * vrp);
          v.at(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }
  if (max_off_diagonal(a) > threshold)
    throw std::runtime_error("jacobi eigensolver did not converge");
}

// Largest-magnitude entry nonnegative, lowest row index on ties.
void apply_sign_convention(Matrix &u) {
  for (int c = 0; c < u.cols; ++c) {
    int arg = 0;
    double best = -1.0;
    for (int r = 0; r < u.rows; ++r) {
      const double m = std::fabs(u.at(r, c));
      if (m > best) {
        best = m;
        arg = r;
      }
    }
    if (u.at(arg, c) < 0.0)
      for (int r = 0; r < u.rows; ++r) u.at(r, c) = -u.at(r, c);
  }
}

}  // namespace

Image EigenimageStack::channel_image(int i) const {
  Image img(height, width);
  std::copy(channel(i), channel(i) + pixels(), img.px.begin());
  return img;
}

SpectralDecomposition spectral_svd(const Matrix &y) {
  if (y.rows < 1 || y.cols < 1) throw std::invalid_argument("spectral_svd: empty matrix");
  double fro2 = 0.0;
  for (double v : y.a) {
    if (!std::isfinite(v)) throw std::invalid_argument("spectral_svd: non-finite input");
    fro2 += v * v;
  }
  if (fro2 == 0.0) throw std::invalid_argument("spectral_svd: all-zero matrix");

  const int bands = y.rows;
  Matrix gram(bands, bands);
  for (int i = 0; i < bands; ++i) {
    const double *yi = y.row(i);
    for (int j = i; j < bands; ++j) {
      const double *yj = y.row(j);
      double dot = 0.0;
      for (int n = 0; n < y.cols; ++n) dot += yi[n] * yj[n];
      gram.at(i, j) = dot;
      gram.at(j, i) = dot;
    }
  }

  Matrix vecs;
  jacobi_eigen(gram, vecs);

  std::vector<int> order(bands);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return gram.at(i, i) > gram.at(j, j); });

  SpectralDecomposition dec;
  dec.basis = Matrix(bands, bands);
  dec.singular_values.resize(bands);
  for (int c = 0; c < bands; ++c) {
    const int src = order[c];
    dec.singular_values[c] = std::sqrt(std::max(gram.at(src, src), 0.0));
    for (int r = 0; r < bands; ++r) dec.basis.at(r, c) = vecs.at(r, src);
  }

  // Columns attached to (numerically) zero singular values carry no signal
  // direction of their own; re-orthonormalize them against earlier columns.
  const double sigma_floor = kZeroSigma * dec.singular_values[0];
  for (int c = 0; c < bands; ++c) {
    if (dec.singular_values[c] > sigma_floor) continue;
    for (int k = 0; k < c; ++k) {
      double dot = 0.0;
      for (int r = 0; r < bands; ++r) dot += dec.basis.at(r, k) * dec.basis.at(r, c);
      for (int r = 0; r < bands; ++r) dec.basis.at(r, c) -= dot * dec.basis.at(r, k);
    }
    double norm2 = 0.0;
    for (int r = 0; r < bands; ++r) norm2 += dec.basis.at(r, c) * dec.basis.at(r, c);
    const double inv = 1.0 / std::sqrt(norm2);
    for (int r = 0; r < bands; ++r) dec.basis.at(r, c) *= inv;
  }

  apply_sign_convention(dec.basis);
  return dec;
}

EigenimageStack project(const Matrix &y, int height, int width,
                        const SpectralDecomposition &dec, int rank) {
  if (y.rows != dec.bands())
    throw std::invalid_argument("project: matrix has " + std::to_string(y.rows) +
                                " bands, basis has " + std::to_string(dec.bands()));
  if (rank < 1 || rank > dec.bands())
    throw std::invalid_argument("project: rank " + std::to_string(rank) + " out of range [1, " +
                                std::to_string(dec.bands()) + "]");
  if (height * width != y.cols)
    throw std::invalid_argument("project: geometry mismatch");

  EigenimageStack stack;
  stack.channels = rank;
  stack.height = height;
  stack.width = width;
  stack.data.assign(static_cast<size_t>(rank) * y.cols, 0.0);
  for (int i = 0; i < rank; ++i) {
    double *out = stack.channel(i);
    for (int l = 0; l < y.rows; ++l) {
      const double u = dec.basis.at(l, i);
      const double *row = y.row(l);
      for (int n = 0; n < y.cols; ++n) out[n] += u * row[n];
    }
  }
  return stack;
}

Matrix reconstruct(const EigenimageStack &stack, const SpectralDecomposition &dec) {
  if (stack.channels < 1 || stack.channels > dec.bands())
    throw std::invalid_argument("reconstruct: channel count " + std::to_string(stack.channels) +
                                " out of range [1, " + std::to_string(dec.bands()) + "]");
  const int pixels = stack.pixels();
  if (static_cast<size_t>(pixels) * stack.channels != stack.data.size())
    throw std::invalid_argument("reconstruct: geometry mismatch");

  Matrix y(dec.bands(), pixels);
  for (int l = 0; l < dec.bands(); ++l) {
    double *row = y.row(l);
    for (int i = 0; i < stack.channels; ++i) {
      const double u = dec.basis.at(l, i);
      const double *ch = stack.channel(i);
      for (int n = 0; n < pixels; ++n) row[n] += u * ch[n];
    }
  }
  return y;
}

int channel_cutoff(const std::vector<double> &sigma, double tau) {
  if (sigma.empty()) throw std::invalid_argument("channel_cutoff: empty sigma");
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("channel_cutoff: tau must be in (0, 1], got " + std::to_string(tau));
  double total = 0.0;
  for (size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < 0.0) throw std::invalid_argument("channel_cutoff: negative singular value");
    if (i > 0 && sigma[i] > sigma[i - 1])
      throw std::invalid_argument("channel_cutoff: sigma not descending");
    total += sigma[i];
  }
  if (total == 0.0) throw std::invalid_argument("channel_cutoff: all-zero sigma");

  int p = 0;
  double running = 0.0;
  for (size_t j = 0; j < sigma.size(); ++j) {
    running += sigma[j];
    if (running / total <= tau) p = static_cast<int>(j) + 1;
  }
  return std::max(p, 1);
}

int sample_channel(int p, Rng &rng) {
  if (p < 1) throw std::invalid_argument("sample_channel: p must be >= 1");
  return rng.next_below(p);
}

}  // namespace eigensr
