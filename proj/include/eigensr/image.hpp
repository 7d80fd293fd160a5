#ifndef EIGENSR_IMAGE_HPP_
#define EIGENSR_IMAGE_HPP_

#include <cstddef>
#include <vector>

namespace eigensr {

/// Single-channel image, row-major doubles.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> px;

  Image() = default;
  Image(int h, int w) : height(h), width(w), px(static_cast<size_t>(h) * w, 0.0) {}

  double &at(int y, int x) { return px[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return px[static_cast<size_t>(y) * width + x]; }
  double *row(int y) { return px.data() + static_cast<size_t>(y) * width; }
  const double *row(int y) const { return px.data() + static_cast<size_t>(y) * width; }
  size_t size() const { return px.size(); }
};

}  // namespace eigensr

#endif
