#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "fpm/field.hpp"

namespace fpm {

// Half-complex spectrum of a real N x N field: N * (N/2 + 1) coefficients,
// slot (sx, sy) at index sx*(N/2+1) + sy with sy in [0, N/2]. Conventions:
// forward transform is the plain unnormalized DFT, inverse carries the
// 1/N^2 factor, so inverse(forward(f)) == f up to round-off.
using Spectrum = std::vector<std::complex<double>>;

Spectrum forward_fft(const ScalarField& f);
ScalarField inverse_fft(const Spectrum& s, const Grid& g);

// Spectral derivatives. The Nyquist slot never contributes (see Grid).
std::pair<ScalarField, ScalarField> gradient(const ScalarField& f);
ScalarField divergence(const ScalarField& vx, const ScalarField& vy);
ScalarField laplacian(const ScalarField& f);

// (-Delta)^s as the Fourier multiplier |k|^(2s), s in (0, 1]. The zero mode
// maps to zero; s == 1 reproduces -laplacian exactly.
ScalarField fractional_laplacian(const ScalarField& f, double s);

// Smooth high-mode taper for pointwise products (quadratic sources and
// transport fluxes): suppresses the aliased top third of the spectrum with a
// C-infinity profile so nothing rings at steep fronts. The zero mode (and
// hence any integral) is untouched.
ScalarField dealias(const ScalarField& f);

// sum over modes of |k|^(2*order) * |f_hat|^2 with quadrature normalization,
// i.e. the discrete value of  integral |(-Delta)^(order/1) ... |  pairings:
//   order 0   -> integral f^2
//   order 1   -> integral |grad f|^2
//   order s+1 -> integral |(-Delta)^(s/2) grad f|^2
//   order 2   -> integral (Delta f)^2
double spectral_weighted_energy(const ScalarField& f, double order);

// Parseval check helper: spectral-side value of integral f^2.
double spectral_l2_sq(const ScalarField& f);

}  // namespace fpm
