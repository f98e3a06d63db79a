#include "jumpdiff/poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace jd {

Poly Poly::constant(double v) {
  Poly p;
  p.c[0] = v;
  p.size = 1;
  return p;
}

Poly Poly::derivative() const {
  Poly d;
  if (size <= 1) return d;
  d.size = size - 1;
  for (int i = 1; i < size; ++i) d.c[i - 1] = c[i] * i;
  return d;
}

Poly Poly::shifted(double s) const {
  // Taylor coefficients p^(j)(s) / j!
  Poly out;
  out.size = size;
  Poly d = *this;
  double fact = 1.0;
  for (int j = 0; j < size; ++j) {
    if (j > 0) fact *= j;
    out.c[j] = d(s) / fact;
    d = d.derivative();
  }
  return out;
}

Poly Poly::scaled(double k) const {
  Poly out = *this;
  for (int i = 0; i < size; ++i) out.c[i] *= k;
  return out;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly out;
  if (a.size == 0 || b.size == 0) return out;
  out.size = a.size + b.size - 1;
  if (out.size > kMaxPolyCoeffs) throw std::length_error("polynomial product exceeds capacity");
  for (int i = 0; i < a.size; ++i)
    for (int j = 0; j < b.size; ++j) out.c[i + j] += a.c[i] * b.c[j];
  return out;
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly out;
  out.size = std::max(a.size, b.size);
  for (int i = 0; i < out.size; ++i) out.c[i] = (i < a.size ? a.c[i] : 0.0) + (i < b.size ? b.c[i] : 0.0);
  return out;
}

}  // namespace jd
