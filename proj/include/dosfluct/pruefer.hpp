#pragma once

// Pruefer angle dynamics and Sturm oscillation counting.
//
// For H x = kappa^2 x with x(0) = 0, write (x, x'/kappa) = r (sin theta, cos theta).
// Then theta' = kappa - (V(t)/kappa) sin^2 theta with V = a(t) F(X_t), and
// theta_tilde = theta - kappa t solves
//   theta_tilde' = -(V/kappa) sin^2(kappa t + theta_tilde) = (V / 2 kappa) Re(e^{2 i theta} - 1).
// theta crosses every multiple of pi upward (slope kappa there), so
// floor(theta_n / pi) is the number of Dirichlet eigenvalues of H on [0, n] below kappa^2.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dosfluct/envelope.hpp"
#include "dosfluct/errors.hpp"
#include "dosfluct/path.hpp"
#include "dosfluct/torus_function.hpp"

namespace dosfluct {

inline constexpr double kPi = std::numbers::pi;

/// floor(x / pi)
inline long long floor_pi(double x) { return static_cast<long long>(std::floor(x / kPi)); }

/// x - floor_pi(x) pi
inline double frac_pi(double x) { return x - static_cast<double>(floor_pi(x)) * kPi; }

/// The potential V(t) = a(t) F(X_t) together with the model it came from.
struct Potential {
  TorusFunction F;
  EnvelopeProfile envelope;
};

/// Fixed-step RK4 for theta_tilde at several energies sharing one potential.
/// Each call to step() crosses one path interval on which X is linear.
class PrueferIntegrator {
 public:
  PrueferIntegrator(const Potential& potential, std::vector<double> kappas, int substeps)
      : eval_(potential.F),
        envelope_(potential.envelope),
        constant_envelope_(potential.envelope.is_constant()),
        a_const_(potential.envelope.value(0.0)),
        kappas_(std::move(kappas)),
        theta_tilde_(kappas_.size(), 0.0),
        substeps_(substeps) {
    if (substeps_ < 1) throw DomainError("PrueferIntegrator: substeps must be >= 1");
    for (double k : kappas_) {
      if (!(k > 0.0)) throw DomainError("PrueferIntegrator: kappa must be positive");
    }
  }

  const std::vector<double>& kappas() const { return kappas_; }
  const std::vector<double>& theta_tilde() const { return theta_tilde_; }
  int substeps() const { return substeps_; }

  /// Advances over [t0, t0 + dt] with X(t0 + s dt) = x0 + s inc; calls
  /// on_substep(t_end) after every substep.
  template <class OnSubstep>
  void step(double t0, double dt, double x0, double inc, OnSubstep&& on_substep) {
    const double h = dt / substeps_;
    const double frac = 1.0 / substeps_;
    if (!have_start_) {
      v_start_ = potential(t0, x0);
      have_start_ = true;
    }
    for (int i = 0; i < substeps_; ++i) {
      const double s0 = i * frac;
      const double ta = t0 + s0 * dt;
      const double tm = ta + 0.5 * h;
      const double tb = (i + 1 == substeps_) ? t0 + dt : ta + h;
      const double vm = potential(tm, x0 + (s0 + 0.5 * frac) * inc);
      const double vb = potential(tb, x0 + (s0 + frac) * inc);
      if (!zero_potential_) {
        for (std::size_t q = 0; q < kappas_.size(); ++q) {
          theta_tilde_[q] = rk4(kappas_[q], ta, h, theta_tilde_[q], v_start_, vm, vb);
        }
      }
      v_start_ = vb;
      on_substep(tb);
    }
  }

  void step(double t0, double dt, double x0, double inc) {
    step(t0, dt, x0, inc, [](double) {});
  }

 private:
  double potential(double t, double x) const {
    if (zero_potential_) return 0.0;
    const double a = constant_envelope_ ? a_const_ : envelope_.value(t);
    return a * eval_(x);
  }

  // sin and cos of a small angle by Taylor series; exact to rounding for |d| < 0.1.
  static void small_sincos(double d, double& sn, double& cs) {
    if (std::abs(d) >= 0.1) {
      sn = std::sin(d);
      cs = std::cos(d);
      return;
    }
    const double d2 = d * d;
    sn = d * (1.0 - d2 / 6.0 * (1.0 - d2 / 20.0 * (1.0 - d2 / 42.0 * (1.0 - d2 / 72.0 * (1.0 - d2 / 110.0)))));
    cs = 1.0 - d2 / 2.0 * (1.0 - d2 / 12.0 * (1.0 - d2 / 30.0 * (1.0 - d2 / 56.0 * (1.0 - d2 / 90.0))));
  }

  // Classical RK4 for y' = -(v(t)/kappa) sin^2(kappa t + y). Stage arguments are
  // the start angle plus a small offset, so one sin/cos pair serves all stages.
  static double rk4(double kappa, double ta, double h, double y, double va, double vm, double vb) {
    const double arg = kappa * ta + y;
    const double sa = std::sin(arg);
    const double ca = std::cos(arg);
    auto sin2_at = [&](double offset) {
      double sd;
      double cd;
      small_sincos(offset, sd, cd);
      const double sv = sa * cd + ca * sd;
      return sv * sv;
    };
    const double inv = 1.0 / kappa;
    const double k1 = -va * inv * sa * sa;
    const double k2 = -vm * inv * sin2_at(0.5 * h * (kappa + k1));
    const double k3 = -vm * inv * sin2_at(0.5 * h * (kappa + k2));
    const double k4 = -vb * inv * sin2_at(h * (kappa + k3));
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  RealTrigEvaluator eval_;
  EnvelopeProfile envelope_;
  bool constant_envelope_;
  double a_const_;
  bool zero_potential_ = eval_.is_zero();
  std::vector<double> kappas_;
  std::vector<double> theta_tilde_;
  int substeps_;
  double v_start_ = 0.0;
  bool have_start_ = false;
};

struct PrueferTrajectory {
  double kappa = 0.0;
  double h = 0.0;  // grid spacing (path dt / substeps)
  std::vector<double> theta;
  std::vector<double> theta_tilde;
  SeedPair path_seed;
  double path_dt = 0.0;
  EnvelopeProfile envelope = PowerDecay{1.0};

  double span() const { return h * static_cast<double>(theta.size() - 1); }
};

inline PrueferTrajectory integrate_theta(const TorusPath& path, const Potential& potential, double kappa,
                                         int substeps) {
  if (!(kappa > 0.0)) throw DomainError("integrate_theta: kappa must be positive");
  if (substeps < 1) throw DomainError("integrate_theta: substeps must be >= 1");
  PrueferIntegrator integrator(potential, {kappa}, substeps);
  PrueferTrajectory traj;
  traj.kappa = kappa;
  traj.h = path.dt / substeps;
  traj.path_seed = path.seed;
  traj.path_dt = path.dt;
  traj.envelope = potential.envelope;
  const std::size_t nodes = path.raw_increments.size() * static_cast<std::size_t>(substeps) + 1;
  traj.theta.reserve(nodes);
  traj.theta_tilde.reserve(nodes);
  traj.theta.push_back(0.0);
  traj.theta_tilde.push_back(0.0);
  for (std::size_t j = 0; j < path.raw_increments.size(); ++j) {
    const double t0 = path.dt * static_cast<double>(j);
    integrator.step(t0, path.dt, path.positions[j], path.raw_increments[j], [&](double t) {
      const double tt = integrator.theta_tilde()[0];
      traj.theta_tilde.push_back(tt);
      traj.theta.push_back(kappa * t + tt);
    });
  }
  return traj;
}

/// Linear interpolation of theta_tilde on the trajectory grid.
inline double theta_tilde_at(const PrueferTrajectory& traj, double t) {
  const double span = traj.span();
  if (t < 0.0 || t > span * (1.0 + 1e-12)) {
    throw DomainError("theta_tilde_at: t = " + std::to_string(t) + " outside [0, " + std::to_string(span) + "]");
  }
  const double u = std::min(t, span) / traj.h;
  auto j = static_cast<std::size_t>(std::floor(u));
  if (j + 1 >= traj.theta_tilde.size()) return traj.theta_tilde.back();
  const double w = u - static_cast<double>(j);
  return (1.0 - w) * traj.theta_tilde[j] + w * traj.theta_tilde[j + 1];
}

/// theta_t(kappa) = kappa t + theta_tilde_t(kappa)
inline double theta_at(const PrueferTrajectory& traj, double t) { return traj.kappa * t + theta_tilde_at(traj, t); }

struct CountResult {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double n = 0.0;
  long long count = 0;
  long long floor1 = 0;
  long long floor2 = 0;
};

inline CountResult count_interval(const PrueferTrajectory& traj1, const PrueferTrajectory& traj2, double n) {
  if (!(traj1.path_seed == traj2.path_seed) || traj1.path_dt != traj2.path_dt || !(traj1.envelope == traj2.envelope)) {
    throw DomainError("count_interval: trajectories were integrated on different potentials");
  }
  if (traj1.kappa > traj2.kappa) throw DomainError("count_interval: requires kappa1 <= kappa2");
  CountResult r;
  r.kappa1 = traj1.kappa;
  r.kappa2 = traj2.kappa;
  r.n = n;
  r.floor1 = floor_pi(theta_at(traj1, n));
  r.floor2 = floor_pi(theta_at(traj2, n));
  r.count = (traj1.kappa == traj2.kappa) ? 0 : r.floor2 - r.floor1;
  return r;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle.

struct FdCount {
  long long count = 0;
  double shift = 0.0;  // nonzero when a pivot breakdown forced E -> E - shift
};

namespace detail {

// Negative pivots of h^2 (A - E) = tridiag(-1, 2 + h^2 (V_i - E), -1); returns -1 on breakdown.
inline long long sturm_negative_pivots(const std::vector<double>& v, double h, double E) {
  const double h2 = h * h;
  long long negatives = 0;
  double d = 1.0;
  bool first = true;
  for (double vi : v) {
    const double diag = 2.0 + h2 * (vi - E);
    d = first ? diag : diag - 1.0 / d;
    first = false;
    if (d == 0.0) return -1;
    if (d < 0.0) ++negatives;
  }
  return negatives;
}

}  // namespace detail

/// Potential samples V(t_i), t_i = i h, i = 1 .. M - 1, for the Dirichlet
/// three-point discretization on [0, n] with M = n / h intervals.
inline std::vector<double> fd_potential(const TorusPath& path, const Potential& potential, double n, double h) {
  if (!(h > 0.0)) throw DomainError("fd_count: h must be positive");
  if (n > path.duration() * (1.0 + 1e-12)) throw DomainError("fd_count: path is shorter than the box");
  const TimeGrid grid = TimeGrid::cover(n, h);
  const RealTrigEvaluator eval(potential.F);
  std::vector<double> v;
  v.reserve(grid.steps > 0 ? grid.steps - 1 : 0);
  for (std::size_t i = 1; i < grid.steps; ++i) {
    const double t = grid.time(i);
    v.push_back(potential.envelope.value(t) * eval(path.at(t)));
  }
  return v;
}

/// Number of eigenvalues strictly below E of the finite-difference Dirichlet operator.
inline FdCount fd_count(const TorusPath& path, const Potential& potential, double n, double h, double E) {
  const auto v = fd_potential(path, potential, n, h);
  const double step = n / static_cast<double>(v.size() + 1);
  FdCount out;
  double shift = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const long long c = detail::sturm_negative_pivots(v, step, E - shift);
    if (c >= 0) {
      out.count = c;
      out.shift = shift;
      return out;
    }
    shift = (shift == 0.0 ? 1e-12 * (1.0 + std::abs(E)) : 16.0 * shift);
  }
  throw ConsistencyError("fd_count: repeated pivot breakdown");
}

inline long long fd_count_interval(const TorusPath& path, const Potential& potential, double n, double h, double E1,
                                   double E2) {
  if (E1 > E2) throw DomainError("fd_count_interval: requires E1 <= E2");
  if (E1 == E2) return 0;
  return fd_count(path, potential, n, h, E2).count - fd_count(path, potential, n, h, E1).count;
}

}  // namespace dosfluct
