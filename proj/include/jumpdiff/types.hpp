#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace jd {

/// Largest supported state dimension. Vectors and matrices are stack-allocated
/// up to this size, which keeps the per-step simulation loop allocation free.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Sentinel for stopping times that never trigger.
inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Eigenvalue tolerance for positive-semidefinite checks of diffusion matrices.
inline constexpr double kPsdTolerance = 1e-10;

inline Vec scalar_vec(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

/// A point queried outside the set on which an evaluator is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A density factor (phi2, phi3, psi) evaluated to a non-positive value.
class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model/change/simulation parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while simulating a path (non-PSD diffusion, NaN state, bound violation).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form oracle requested outside the regime where it is valid.
class OracleUnavailable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A state of E extended by the cemetery point. The cemetery is an out-of-band
/// tag, never a coordinate vector, and compares equal only to itself.
class State {
 public:
  explicit State(Vec x) : x_(std::move(x)), dead_(false) {}

  static State cemetery() {
    State s;
    s.dead_ = true;
    return s;
  }

  bool is_cemetery() const { return dead_; }

  const Vec& point() const {
    if (dead_) throw DomainError("cemetery state has no coordinates");
    return x_;
  }

  friend bool operator==(const State& a, const State& b) {
    if (a.dead_ || b.dead_) return a.dead_ == b.dead_;
    return a.x_.size() == b.x_.size() && a.x_ == b.x_;
  }

 private:
  State() : dead_(true) {}

  Vec x_;
  bool dead_;
};

std::string format_state(const Vec& x);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);

}  // namespace jd
