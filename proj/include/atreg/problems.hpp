#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "atreg/operators.hpp"
#include "atreg/rng.hpp"

namespace atreg {

/// Discrete ill-posed test problem. The noise-free right-hand side is always
/// computed as A * x_ex, so the unperturbed system is consistent by
/// construction.
struct TestProblem {
  std::string name;
  LinearOperator A;
  Vector x_ex;
  Vector b_ex;
  std::size_t n = 0;
};

/// Noisy right-hand side b = b_ex + e with ||e|| / ||b_ex|| equal to the
/// requested level.
struct NoisySystem {
  Vector b;
  Vector e;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline TestProblem make_problem(std::string name, Matrix A, Vector x_ex) {
  TestProblem p{std::move(name), dense_operator(std::move(A)), std::move(x_ex), {}, 0};
  p.n = p.A.dim_in();
  p.b_ex = p.A.apply(p.x_ex);
  return p;
}

inline double sinc_sq(double u) {
  if (u == 0.0) return 1.0;
  const double s = std::sin(u) / u;
  return s * s;
}

}  // namespace detail

/// One-dimensional image reconstruction model. Midpoint-rule discretization on
/// [-pi/2, pi/2]^2 of the kernel (cos s + cos t)^2 (sin u / u)^2 with
/// u = pi (sin s + sin t); the exact solution is a sum of two Gaussians.
inline TestProblem gen_shaw(std::size_t n) {
  if (n < 4 || n % 2 != 0) throw InvalidSize("gen_shaw: n must be even and >= 4");
  constexpr double pi = 3.141592653589793238462643383280;
  const double h = pi / static_cast<double>(n);

  Vector pts(n), sins(n), coss(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = -pi / 2.0 + (static_cast<double>(i) + 0.5) * h;
    sins[i] = std::sin(pts[i]);
    coss[i] = std::cos(pts[i]);
  }

  Matrix A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double u = pi * (sins[i] + sins[j]);
      const double c = coss[i] + coss[j];
      A(i, j) = h * c * c * detail::sinc_sq(u);
    }

  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = pts[j];
    x[j] = 2.0 * std::exp(-6.0 * (t - 0.8) * (t - 0.8)) + std::exp(-2.0 * (t + 0.5) * (t + 0.5));
  }
  return detail::make_problem("shaw", std::move(A), std::move(x));
}

/// Fredholm equation with kernel exp(s cos t), s in [0, pi/2], t in [0, pi];
/// exact solution sin t.
inline TestProblem gen_baart(std::size_t n) {
  if (n < 4) throw InvalidSize("gen_baart: n must be >= 4");
  constexpr double pi = 3.141592653589793238462643383280;
  const double ht = pi / static_cast<double>(n);
  const double hs = (pi / 2.0) / static_cast<double>(n);

  Matrix A(n, n);
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * ht;
    x[j] = std::sin(t);
    const double ct = std::cos(t);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (static_cast<double>(i) + 0.5) * hs;
      A(i, j) = ht * std::exp(s * ct);
    }
  }
  return detail::make_problem("baart", std::move(A), std::move(x));
}

/// Severely ill-posed kernel (s^2 + t^2)^{1/2} on [0, 1]^2; exact solution t.
inline TestProblem gen_foxgood(std::size_t n) {
  if (n < 4) throw InvalidSize("gen_foxgood: n must be >= 4");
  const double h = 1.0 / static_cast<double>(n);

  Matrix A(n, n);
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * h;
    x[j] = t;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (static_cast<double>(i) + 0.5) * h;
      A(i, j) = h * std::sqrt(s * s + t * t);
    }
  }
  return detail::make_problem("foxgood", std::move(A), std::move(x));
}

/// Inverse Laplace transform with kernel exp(-s t), truncated to [0, 10]^2;
/// exact solution exp(-t / 2).
inline TestProblem gen_ilaplace(std::size_t n) {
  if (n < 4) throw InvalidSize("gen_ilaplace: n must be >= 4");
  const double h = 10.0 / static_cast<double>(n);

  Matrix A(n, n);
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * h;
    x[j] = std::exp(-t / 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (static_cast<double>(i) + 0.5) * h;
      A(i, j) = h * std::exp(-s * t);
    }
  }
  return detail::make_problem("i_laplace", std::move(A), std::move(x));
}

/// Image deblurring problem: the operator is the separable Gaussian blur and
/// the exact solution is the supplied n x n image with pixels in [0, 1].
inline TestProblem gen_blur(std::size_t n, std::size_t band, double sigma, Vector image) {
  if (image.size() != n * n) throw DimensionMismatch("gen_blur: image must have n^2 pixels");
  KroneckerBlurOperator blur = blur_operator(n, band, sigma);
  TestProblem p{"blur", blur.to_operator(), std::move(image), {}, n * n};
  p.b_ex = p.A.apply(p.x_ex);
  return p;
}

/// Additive Gaussian noise scaled to an exact relative level:
/// e = eps * ||b_ex|| * w / ||w|| with w drawn from GaussianStream(seed).
inline NoisySystem add_noise(const Vector& b_ex, double eps, std::uint64_t seed) {
  if (eps < 0.0) throw InvalidNoise("add_noise: noise level must be nonnegative");
  NoisySystem out;
  out.noise_level = eps;
  out.seed = seed;
  out.e.assign(b_ex.size(), 0.0);
  out.b = b_ex;
  const double b_norm = norm(b_ex);
  if (eps > 0.0 && b_norm > 0.0) {
    GaussianStream stream(seed);
    Vector w = stream.draw(b_ex.size());
    const double w_norm = norm(w);
    const double scale = eps * b_norm / w_norm;
    for (std::size_t i = 0; i < b_ex.size(); ++i) {
      out.e[i] = scale * w[i];
      out.b[i] = b_ex[i] + out.e[i];
    }
  }
  return out;
}

}  // namespace atreg
