#ifndef EIGENSR_RESAMPLE_HPP_
#define EIGENSR_RESAMPLE_HPP_

#include "eigensr/cube.hpp"
#include "eigensr/image.hpp"

namespace eigensr {

/// Keys cubic convolution kernel, a = -0.5, support (-2, 2).
double cubic_kernel(double t);

/// Downscales by an integer factor (>= 2) with the anti-aliased separable
/// cubic kernel. Height and width must be divisible by the factor. Exactly
/// linear in the input; constants are preserved.
Image bicubic_downsample(const Image &img, int factor);

/// Upscales by an integer factor (>= 2) with the separable cubic kernel.
/// Exactly linear; constants are preserved.
Image bicubic_upsample(const Image &img, int factor);

/// Per-band application of the image operators.
HsiCube downsample_cube(const HsiCube &cube, int factor);
HsiCube upsample_cube(const HsiCube &cube, int factor);

}  // namespace eigensr

#endif
