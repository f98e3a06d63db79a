#pragma once

#include <array>
#include <span>

namespace jd {

inline constexpr int kMaxPolyCoeffs = 24;

/// Dense polynomial with fixed capacity, c[0] + c[1] u + ... (no heap use).
struct Poly {
  std::array<double, kMaxPolyCoeffs> c{};
  int size = 0;

  static Poly constant(double v);

  double operator()(double u) const {
    double acc = 0.0;
    for (int i = size - 1; i >= 0; --i) acc = acc * u + c[i];
    return acc;
  }

  Poly derivative() const;
  /// q(u) = p(u + s).
  Poly shifted(double s) const;
  Poly scaled(double k) const;

  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator+(const Poly& a, const Poly& b);
};

/// p(y - center) on the open interval (lo, hi), zero elsewhere.
struct PolyPiece {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  Poly poly;

  double operator()(double y) const { return (y > lo && y < hi) ? poly(y - center) : 0.0; }
};

/// Scalar integrand xi -> sum_i piece_i(xi + shift) + constant.
struct PolyIntegrand {
  std::span<const PolyPiece> pieces;
  double shift = 0.0;
  double constant = 0.0;
};

}  // namespace jd
