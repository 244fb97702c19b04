#pragma once

#include <Eigen/Core>
#include <complex>

namespace lfpp {

using ComplexGrid = Eigen::ArrayXXcd;
using RealGrid = Eigen::ArrayXXd;

/// In-place radix-2 transform of a contiguous length-n sequence, n a power of
/// two. Forward uses kernel e^{-2pi i jk/n}, inverse e^{+2pi i jk/n}; neither
/// applies a 1/n factor.
void fft_pow2(std::complex<double>* data, int n, bool inverse);

/// 2-D transform over all columns then all rows of a square array.
void fft2_pow2(ComplexGrid& grid, bool inverse);

}  // namespace lfpp
