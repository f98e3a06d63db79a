#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace jd {

/// Running count, mean and sum of squared deviations (Welford), mergeable with
/// Chan's pairwise update.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * (o.n / total);
    m2 += o.m2 + delta * delta * (n * o.n / total);
    n = total;
  }

  double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
  double se() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }
};

/// Moments of `values` reduced as a fixed binary tree over chunks of `chunk`
/// entries. The tree shape depends only on the length, so the result is the
/// same however the values were produced.
inline Moments pairwise_moments(std::span<const double> values, std::size_t chunk = 1024) {
  std::vector<Moments> level;
  level.reserve(values.size() / chunk + 1);
  for (std::size_t lo = 0; lo < values.size(); lo += chunk) {
    Moments m;
    const std::size_t hi = std::min(values.size(), lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) m.add(values[i]);
    level.push_back(m);
  }
  if (level.empty()) return {};
  while (level.size() > 1) {
    std::vector<Moments> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      Moments m = level[i];
      m.merge(level[i + 1]);
      next.push_back(m);
    }
    if (level.size() % 2 == 1) next.push_back(level.back());
    level.swap(next);
  }
  return level.front();
}

/// Standard error of the difference of two independent means.
inline double combined_se(const Moments& a, const Moments& b) {
  return std::sqrt(a.se() * a.se() + b.se() * b.se());
}

}  // namespace jd
