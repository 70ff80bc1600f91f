#pragma once

// Brownian motion on the circle R / 2piZ, sampled on a uniform grid.
//
// Increments have variance dt (generator L = 1/2 d^2/dx^2). The starting point
// X_0 is drawn uniformly, i.e. from the stationary law, so that the process
// is stationary and boundary terms at t = 0 average out.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "dosfluct/errors.hpp"
#include "dosfluct/rng.hpp"

namespace dosfluct {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

/// Uniform grid over [0, T]: ceil(T / dt) steps, shrunk so the last node is exactly T.
struct TimeGrid {
  std::size_t steps = 0;
  double dt = 0.0;
  double T = 0.0;

  static TimeGrid cover(double T, double dt) {
    if (!(dt > 0.0)) throw DomainError("time grid: dt must be positive");
    if (!(T > 0.0)) throw DomainError("time grid: T must be positive");
    if (dt > T) throw DomainError("time grid: dt must not exceed T");
    const double ratio = T / dt;
    auto steps = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12)));
    if (steps == 0) steps = 1;
    return {steps, T / static_cast<double>(steps), T};
  }

  double time(std::size_t j) const { return j == steps ? T : T * static_cast<double>(j) / static_cast<double>(steps); }
};

/// Streams a Brownian path one increment at a time; identical for equal seeds.
class PathStream {
 public:
  PathStream(SeedPair seed, double dt) : rng_(seed), sqrt_dt_(std::sqrt(dt)) {
    position_ = kTwoPi * (static_cast<double>(rng_.next_u64() >> 11) * 0x1.0p-53);
  }

  double position() const { return position_; }

  /// Draws the next raw increment and advances the wrapped position.
  double advance() {
    const double inc = sqrt_dt_ * rng_.next_normal();
    position_ = wrap_angle(position_ + inc);
    return inc;
  }

 private:
  PhiloxStream rng_;
  double sqrt_dt_;
  double position_;
};

struct TorusPath {
  double dt = 0.0;
  std::vector<double> positions;       // wrapped into [0, 2pi)
  std::vector<double> raw_increments;  // unwrapped
  SeedPair seed;

  double duration() const { return dt * static_cast<double>(raw_increments.size()); }

  /// Angle-unwrapped linear interpolation at t = (j + frac) dt; result is not wrapped.
  double interpolate(std::size_t j, double frac) const {
    if (j >= raw_increments.size()) return positions.back();
    return positions[j] + frac * raw_increments[j];
  }

  double at(double t) const {
    if (t <= 0.0) return positions.front();
    const double u = t / dt;
    auto j = static_cast<std::size_t>(std::floor(u));
    if (j >= raw_increments.size()) return positions.back();
    return interpolate(j, u - static_cast<double>(j));
  }

  /// CSV with columns t,x for debugging.
  void write_csv(std::ostream& os) const {
    os << "t,x\n";
    char buf[64];
    for (std::size_t j = 0; j < positions.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", dt * static_cast<double>(j), positions[j]);
      os << buf;
    }
  }
};

inline TorusPath sample_path(double T, double dt, SeedPair seed) {
  if (!(dt > 0.0)) throw DomainError("sample_path: dt must be positive");
  const TimeGrid grid = TimeGrid::cover(T, dt);
  TorusPath path;
  path.dt = grid.dt;
  path.seed = seed;
  path.positions.reserve(grid.steps + 1);
  path.raw_increments.reserve(grid.steps);
  PathStream stream(seed, grid.dt);
  path.positions.push_back(stream.position());
  for (std::size_t j = 0; j < grid.steps; ++j) {
    path.raw_increments.push_back(stream.advance());
    path.positions.push_back(stream.position());
  }
  return path;
}

}  // namespace dosfluct
