#pragma once

#include <optional>
#include <vector>

#include "atlas/dynamics.hpp"

namespace atlas {

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
};

struct FlowOptions {
  Tolerances tol{};
  double drift_bound = 1e-8;     // abort when |K| exceeds this along the run
  double flow_sun_guard = 1e-6;  // abort when |2v^2-1| falls below this
  double event_time_budget = 1e4; // cap for open-ended event searches
};

struct TrajectorySample {
  double t;
  RegPoint z;
  double k_residual; // K(z); zero on the surface up to integrator drift
};

struct Trajectory {
  Params params;
  std::vector<TrajectorySample> samples; // strictly increasing |t|
  double max_k_residual = 0.0;
};

/// Affine-hyperplane stand-in for a surface-of-section interior:
/// {z : <normal, z> = offset}, crossings counted only when the normal
/// component of the velocity has the orientation's sign.
struct Section {
  Tangent4 normal; // unit
  double offset = 0.0;
  int orientation = +1;

  double side(const RegPoint& z) const {
    const auto n = normal.coords();
    const auto x = z.coords();
    return n[0] * x[0] + n[1] * x[1] + n[2] * x[2] + n[3] * x[3] - offset;
  }

  /// The section {v2 = 0} with the given crossing orientation.
  static Section v2_zero(int orientation);
};

struct CrossingEvent {
  double t;
  RegPoint z;
  double transversality; // <normal, zdot> at the crossing
};

struct SectionCrossings {
  std::vector<CrossingEvent> events;     // oriented, |transversality| > 1e-10
  std::vector<CrossingEvent> tangential; // |transversality| <= 1e-10
};

struct PeriodicOrbit {
  RegPoint z0;
  double period;
  double closure_error; // |flow(period)(z0) - z0|
  double return_trace;  // trace of the linearized 2x2 section return map
};

/// One embedded Dormand-Prince 5(4) step of size h from z (FSAL: pass the
/// field at z, get the field at the 5th-order result back). err is the
/// componentwise embedded error estimate.
struct RkStep {
  RegPoint z;
  Tangent4 f;
  std::array<double, 4> err;
};
RkStep dopri5_step(const Params& params, const RegPoint& z, double h,
                   const Tangent4& f_at_z);

/// Adaptive integration of the K-flow over [0, t_end] (t_end may be
/// negative). Requires |K(z0)| < 1e-8. Records every accepted step.
Trajectory integrate(const Params& params, const RegPoint& z0, double t_end,
                     const FlowOptions& opts = FlowOptions{});

/// Sign changes of the section function between accepted steps, refined on
/// cubic Hermite dense output by bisection to |residual| < 1e-10. Oriented
/// crossings and tangential ones are reported separately.
SectionCrossings section_crossings(const Params& params, const RegPoint& z0,
                                   double t_end, const Section& section,
                                   const FlowOptions& opts = FlowOptions{});

/// The first n oriented crossings after z0 (iterates of the section return
/// map). z0 must lie on the section and on {K = 0} to 1e-8.
std::vector<RegPoint> return_map(const Params& params, const Section& section,
                                 const RegPoint& z0, int n,
                                 const FlowOptions& opts = FlowOptions{});

struct OrbitOptions {
  FlowOptions flow{};
  double u1_tol = 1e-10;      // shooting target |u1| at the half crossing
  bool negative_branch = false; // start with u2 <= 0 instead of u2 >= 0
  double fd_step = 1e-7;      // finite-difference step for the return trace
  int max_iter = 80;
};

/// Reversible shooting for a symmetric periodic orbit: initial conditions on
/// Fix(rho) = {v2 = 0, u1 = 0} solved from K = 0, integrated to the next
/// {v2 = 0} crossing; the bracket [v1_lo, v1_hi] must change the sign of u1
/// there. The half-orbit reflects by rho to the full orbit.
PeriodicOrbit find_symmetric_orbit(const Params& params, double v1_lo,
                                   double v1_hi,
                                   const OrbitOptions& opts = OrbitOptions{});

/// The reversor rho(v, u) = (conj(v), -conj(u)); K is rho-invariant and
/// rho . flow_t . rho = flow_{-t}.
inline RegPoint reversor(const RegPoint& z) {
  return {std::conj(z.v), -std::conj(z.u)};
}

/// On-surface lift: the u2 >= 0 (or <= 0) root of K(v1, 0, u1, u2) = 0.
/// Used for section coordinates (v1, u1) in the symmetric-orbit machinery.
std::optional<RegPoint> lift_section_point(const Params& params, double v1,
                                           double u1, bool negative_branch = false);

} // namespace atlas
