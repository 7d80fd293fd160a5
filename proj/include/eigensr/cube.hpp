#ifndef EIGENSR_CUBE_HPP_
#define EIGENSR_CUBE_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "eigensr/matrix.hpp"

namespace eigensr {

/// Thrown for malformed or unsupported file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hyperspectral cube: `bands` spatial images of height x width, stored
/// band-major so the data doubles as a bands x (height*width) matrix.
/// Immutable by convention once constructed; values are always finite.
struct HsiCube {
  int bands = 0;
  int height = 0;
  int width = 0;
  Matrix y;  // bands x pixels, row l = band l

  int pixels() const { return height * width; }
  double at(int band, int row, int col) const { return y.at(band, row * width + col); }
};

/// Builds a cube from its matrix view. The matrix must be bands x (height*width)
/// with every entry finite.
HsiCube cube_from_matrix(Matrix y, int height, int width);

/// The bands x pixels matrix view, aliasing the cube's storage.
inline const Matrix &matrix_view(const HsiCube &cube) { return cube.y; }

/// Reads a cube from a .hsc file or a 3-D little-endian float32 NPY file
/// (dispatch on magic bytes).
HsiCube read_cube(const std::filesystem::path &path);

/// Writes the native .hsc format (float32 payload).
void write_cube(const HsiCube &cube, const std::filesystem::path &path);

/// Writes an NPY v1.0 file, shape (bands, height, width), dtype <f4.
void write_cube_npy(const HsiCube &cube, const std::filesystem::path &path);

}  // namespace eigensr

#endif
