#include "atlas/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "atlas/convexity.hpp"

namespace atlas {

namespace {

using Vec4 = std::array<double, 4>;

Vec4 field(const Params& params, const Vec4& y) {
  const Tangent4 f =
      hamiltonian_vector_field(params, RegPoint::from_coords(y));
  return f.coords();
}

double k_value(const Params& params, const Vec4& y) {
  return regularized_hamiltonian(params, RegPoint::from_coords(y));
}

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
// b - bhat: embedded 4th-order error weights (FSAL 7th stage included).
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;

struct StepOut {
  Vec4 y;   // 5th-order solution
  Vec4 f;   // field at y (FSAL stage)
  Vec4 err; // embedded error estimate
};

StepOut raw_step(const Params& params, const Vec4& y, double h, const Vec4& k1) {
  Vec4 t, k2, k3, k4, k5, k6;
  for (int i = 0; i < 4; ++i) t[i] = y[i] + h * A21 * k1[i];
  k2 = field(params, t);
  for (int i = 0; i < 4; ++i) t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
  k3 = field(params, t);
  for (int i = 0; i < 4; ++i)
    t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
  k4 = field(params, t);
  for (int i = 0; i < 4; ++i)
    t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
  k5 = field(params, t);
  for (int i = 0; i < 4; ++i)
    t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] +
                       A65 * k5[i]);
  k6 = field(params, t);

  StepOut out;
  for (int i = 0; i < 4; ++i)
    out.y[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] +
                           B6 * k6[i]);
  out.f = field(params, out.y);
  for (int i = 0; i < 4; ++i)
    out.err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                      E6 * k6[i] + E7 * out.f[i]);
  return out;
}

struct Span {
  double t0, t1;
  Vec4 y0, f0, y1, f1;
};

// Cubic Hermite dense output on an accepted span.
Vec4 hermite(const Span& s, double theta) {
  const double h = s.t1 - s.t0;
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  Vec4 y;
  for (int i = 0; i < 4; ++i)
    y[i] = h00 * s.y0[i] + h10 * h * s.f0[i] + h01 * s.y1[i] + h11 * h * s.f1[i];
  return y;
}

// Adaptive driver over [0, t_end]; on_span may stop the run by returning
// false. Guards (drift, sun approach, step underflow) are checked at
// accepted points.
void drive(const Params& params, const RegPoint& z0, double t_end,
           const FlowOptions& opts,
           const std::function<bool(const Span&)>& on_span) {
  Vec4 y = z0.coords();
  if (sun_gap(z0.v) < opts.flow_sun_guard)
    throw IntegrationFailure(IntegrationFailure::Kind::SingularityApproach, 0.0,
                             "initial point inside the sun-collision guard");
  Vec4 f;
  try {
    f = field(params, y);
  } catch (const SingularInput& e) {
    throw IntegrationFailure(IntegrationFailure::Kind::SingularityApproach, 0.0,
                             e.what());
  }
  if (t_end == 0.0) return;

  const double dir = t_end > 0.0 ? 1.0 : -1.0;
  double t = 0.0;
  double h = dir * 1e-4;

  for (;;) {
    bool final_step = false;
    if ((t + h - t_end) * dir >= 0.0) {
      h = t_end - t;
      final_step = true;
    }

    StepOut out;
    try {
      out = raw_step(params, y, h, f);
    } catch (const SingularInput& e) {
      throw IntegrationFailure(IntegrationFailure::Kind::SingularityApproach, t,
                               e.what());
    }

    double err_norm = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double scale =
          opts.tol.abs +
          opts.tol.rel * std::max(std::abs(y[i]), std::abs(out.y[i]));
      const double r = out.err[i] / scale;
      err_norm += r * r;
    }
    err_norm = std::sqrt(err_norm / 4.0);

    if (err_norm <= 1.0) {
      const double t_new = final_step ? t_end : t + h;
      const RegPoint z_new = RegPoint::from_coords(out.y);
      if (sun_gap(z_new.v) < opts.flow_sun_guard)
        throw IntegrationFailure(IntegrationFailure::Kind::SingularityApproach,
                                 t_new, "|2v^2-1| fell below the flow guard");
      const double k = k_value(params, out.y);
      if (std::abs(k) > opts.drift_bound)
        throw IntegrationFailure(
            IntegrationFailure::Kind::DriftExceeded, t_new,
            "|K| = " + std::to_string(std::abs(k)) + " exceeds the drift bound");
      const Span span{t, t_new, y, f, out.y, out.f};
      y = out.y;
      f = out.f;
      t = t_new;
      if (!on_span(span) || final_step) return;
    }

    const double factor =
        err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
      throw IntegrationFailure(IntegrationFailure::Kind::StepUnderflow, t,
                               "adaptive step size underflow");
  }
}

double section_g(const Section& sec, const Vec4& y) {
  const auto n = sec.normal.coords();
  return n[0] * y[0] + n[1] * y[1] + n[2] * y[2] + n[3] * y[3] - sec.offset;
}

// Refine a bracketed sign change of the section function on a span by
// bisection over the Hermite interpolant.
CrossingEvent refine_crossing(const Params& params, const Section& sec,
                              const Span& span, double g0, double g1) {
  double lo = 0.0, hi = 1.0;
  double glo = g0;
  Vec4 y = span.y1;
  double theta = 1.0;
  double g = g1;
  for (int it = 0; it < 200; ++it) {
    theta = 0.5 * (lo + hi);
    y = hermite(span, theta);
    g = section_g(sec, y);
    if (std::abs(g) < 1e-10) break;
    if ((g > 0.0) == (glo > 0.0)) {
      lo = theta;
      glo = g;
    } else {
      hi = theta;
    }
  }
  CrossingEvent ev;
  ev.t = span.t0 + theta * (span.t1 - span.t0);
  ev.z = RegPoint::from_coords(y);
  const Vec4 fz = field(params, y);
  const auto n = sec.normal.coords();
  ev.transversality =
      n[0] * fz[0] + n[1] * fz[1] + n[2] * fz[2] + n[3] * fz[3];
  return ev;
}

// Walks the flow reporting every section crossing; on_event may stop the
// run. Tangential crossings (|transversality| <= 1e-10) are classified by
// the caller.
void walk_crossings(
    const Params& params, const RegPoint& z0, double t_end, const Section& sec,
    const FlowOptions& opts,
    const std::function<bool(const CrossingEvent&)>& on_event) {
  double g_prev = section_g(sec, z0.coords());
  drive(params, z0, t_end, opts, [&](const Span& span) {
    const double g1 = section_g(sec, span.y1);
    const double g0 = g_prev;
    g_prev = g1;
    if ((g0 > 0.0 && g1 < 0.0) || (g0 < 0.0 && g1 > 0.0))
      return on_event(refine_crossing(params, sec, span, g0, g1));
    if (g1 == 0.0 && g0 != 0.0) {
      CrossingEvent ev;
      ev.t = span.t1;
      ev.z = RegPoint::from_coords(span.y1);
      const auto n = sec.normal.coords();
      ev.transversality = n[0] * span.f1[0] + n[1] * span.f1[1] +
                          n[2] * span.f1[2] + n[3] * span.f1[3];
      return on_event(ev);
    }
    return true;
  });
}

constexpr double kTangentialBand = 1e-10;
constexpr double kSurfaceTol = 1e-8;

} // namespace

Section Section::v2_zero(int orientation) {
  Section s;
  s.normal = Tangent4::from_coords({0.0, 1.0, 0.0, 0.0});
  s.offset = 0.0;
  s.orientation = orientation;
  return s;
}

RkStep dopri5_step(const Params& params, const RegPoint& z, double h,
                   const Tangent4& f_at_z) {
  const StepOut out = raw_step(params, z.coords(), h, f_at_z.coords());
  return {RegPoint::from_coords(out.y), Tangent4::from_coords(out.f), out.err};
}

Trajectory integrate(const Params& params, const RegPoint& z0, double t_end,
                     const FlowOptions& opts) {
  const double k0 = regularized_hamiltonian(params, z0);
  if (std::abs(k0) >= kSurfaceTol)
    throw InvalidParams("initial point is off the surface: |K(z0)| = " +
                        std::to_string(std::abs(k0)));

  Trajectory traj{params, {}, std::abs(k0)};
  traj.samples.push_back({0.0, z0, k0});
  drive(params, z0, t_end, opts, [&](const Span& span) {
    const double k = k_value(params, span.y1);
    traj.samples.push_back({span.t1, RegPoint::from_coords(span.y1), k});
    traj.max_k_residual = std::max(traj.max_k_residual, std::abs(k));
    return true;
  });
  return traj;
}

SectionCrossings section_crossings(const Params& params, const RegPoint& z0,
                                   double t_end, const Section& section,
                                   const FlowOptions& opts) {
  const double k0 = regularized_hamiltonian(params, z0);
  if (std::abs(k0) >= kSurfaceTol)
    throw InvalidParams("initial point is off the surface: |K(z0)| = " +
                        std::to_string(std::abs(k0)));

  SectionCrossings out;
  walk_crossings(params, z0, t_end, section, opts,
                 [&](const CrossingEvent& ev) {
                   if (std::abs(ev.transversality) <= kTangentialBand)
                     out.tangential.push_back(ev);
                   else if (section.orientation == 0 ||
                            (ev.transversality > 0.0) ==
                                (section.orientation > 0))
                     out.events.push_back(ev);
                   return true;
                 });
  return out;
}

std::vector<RegPoint> return_map(const Params& params, const Section& section,
                                 const RegPoint& z0, int n,
                                 const FlowOptions& opts) {
  const double k0 = regularized_hamiltonian(params, z0);
  if (std::abs(k0) >= kSurfaceTol)
    throw InvalidParams("initial point is off the surface: |K(z0)| = " +
                        std::to_string(std::abs(k0)));
  if (std::abs(section.side(z0)) >= kSurfaceTol)
    throw InvalidParams("initial point is off the section");

  std::vector<RegPoint> iterates;
  if (n <= 0) return iterates;
  try {
    walk_crossings(params, z0, opts.event_time_budget, section, opts,
                   [&](const CrossingEvent& ev) {
                     if (std::abs(ev.transversality) <= kTangentialBand)
                       return true;
                     if (section.orientation != 0 &&
                         (ev.transversality > 0.0) != (section.orientation > 0))
                       return true;
                     iterates.push_back(ev.z);
                     return static_cast<int>(iterates.size()) < n;
                   });
  } catch (const IntegrationFailure& e) {
    throw IntegrationFailure(e.kind, e.t,
                             std::string(e.what()) + " (at return-map iterate " +
                                 std::to_string(iterates.size()) + ")");
  }
  if (static_cast<int>(iterates.size()) < n)
    throw IntegrationFailure(
        IntegrationFailure::Kind::EventBudget, opts.event_time_budget,
        "time budget exhausted at return-map iterate " +
            std::to_string(iterates.size()));
  return iterates;
}

std::optional<RegPoint> lift_section_point(const Params& params, double v1,
                                           double u1, bool negative_branch) {
  const Cplx v(v1, 0.0);
  const Cplx w = fiber_linear_term(params, v);
  const double e = fiber_offset(params, v);
  const double disc =
      w.imag() * w.imag() - u1 * u1 - 2.0 * u1 * w.real() - 2.0 * e;
  if (disc < 0.0) return std::nullopt;
  const double u2 = negative_branch ? -w.imag() - std::sqrt(disc)
                                    : -w.imag() + std::sqrt(disc);
  return RegPoint{v, Cplx(u1, u2)};
}

namespace {

struct HalfShot {
  double u1;     // u1 at the first {v2 = 0} crossing
  double t_half; // crossing time
};

HalfShot shoot_half(const Params& params, const RegPoint& z0,
                    const OrbitOptions& opts) {
  const Section sec = Section::v2_zero(0);
  std::optional<CrossingEvent> hit;
  walk_crossings(params, z0, opts.flow.event_time_budget, sec, opts.flow,
                 [&](const CrossingEvent& ev) {
                   if (std::abs(ev.transversality) <= kTangentialBand)
                     throw IntegrationFailure(
                         IntegrationFailure::Kind::EventBudget, ev.t,
                         "non-transversal v2 = 0 crossing");
                   hit = ev;
                   return false;
                 });
  if (!hit)
    throw IntegrationFailure(IntegrationFailure::Kind::EventBudget,
                             opts.flow.event_time_budget,
                             "no v2 = 0 crossing within the time budget");
  return {hit->z.u.real(), hit->t};
}

RegPoint symmetric_start(const Params& params, double v1,
                         const OrbitOptions& opts) {
  const auto z = lift_section_point(params, v1, 0.0, opts.negative_branch);
  if (!z)
    throw InvalidParams("v1 = " + std::to_string(v1) +
                        " lies outside the projection of the surface");
  return *z;
}

} // namespace

PeriodicOrbit find_symmetric_orbit(const Params& params, double v1_lo,
                                   double v1_hi, const OrbitOptions& opts) {
  params.require_compact();
  auto shoot = [&](double v1) {
    return shoot_half(params, symmetric_start(params, v1, opts), opts);
  };

  double lo = v1_lo, hi = v1_hi;
  HalfShot slo = shoot(lo), shi = shoot(hi);
  if (slo.u1 == 0.0) hi = lo;
  if ((slo.u1 > 0.0) == (shi.u1 > 0.0) && slo.u1 != 0.0 && shi.u1 != 0.0)
    throw RootFindFailure("u1 has no sign change over the bracket [" +
                          std::to_string(v1_lo) + ", " + std::to_string(v1_hi) +
                          "]: u1(lo) = " + std::to_string(slo.u1) +
                          ", u1(hi) = " + std::to_string(shi.u1));

  // Bisection with a secant candidate when it falls inside the bracket.
  double best_v1 = std::abs(slo.u1) < std::abs(shi.u1) ? lo : hi;
  HalfShot best = std::abs(slo.u1) < std::abs(shi.u1) ? slo : shi;
  for (int it = 0; it < opts.max_iter && std::abs(best.u1) > opts.u1_tol; ++it) {
    double cand = 0.5 * (lo + hi);
    const double denom = shi.u1 - slo.u1;
    if (denom != 0.0) {
      const double secant = lo - slo.u1 * (hi - lo) / denom;
      if (secant > lo + 1e-15 && secant < hi - 1e-15) cand = secant;
    }
    const HalfShot sc = shoot(cand);
    if (std::abs(sc.u1) < std::abs(best.u1)) {
      best = sc;
      best_v1 = cand;
    }
    if (sc.u1 == 0.0) break;
    if ((sc.u1 > 0.0) == (slo.u1 > 0.0)) {
      lo = cand;
      slo = sc;
    } else {
      hi = cand;
      shi = sc;
    }
    if (hi - lo < 1e-15) break;
  }
  if (std::abs(best.u1) > opts.u1_tol)
    throw RootFindFailure("symmetric shooting stalled: |u1| = " +
                          std::to_string(std::abs(best.u1)));

  PeriodicOrbit orbit;
  orbit.z0 = symmetric_start(params, best_v1, opts);
  orbit.period = 2.0 * best.t_half;

  // Closure check over one full period.
  RegPoint z_end = orbit.z0;
  drive(params, orbit.z0, orbit.period, opts.flow, [&](const Span& span) {
    z_end = RegPoint::from_coords(span.y1);
    return true;
  });
  orbit.closure_error = distance(z_end, orbit.z0);

  // Linearized return map on the oriented section {v2 = 0} in the on-surface
  // coordinates (v1, u1), differentiated by central differences.
  const Tangent4 f0 = hamiltonian_vector_field(params, orbit.z0);
  const int orientation = f0.dv.imag() > 0.0 ? +1 : -1;
  const Section sec = Section::v2_zero(orientation);
  auto return_point = [&](double v1, double u1) {
    const auto z = lift_section_point(params, v1, u1, opts.negative_branch);
    if (!z)
      throw RootFindFailure("return-map chart left the surface projection");
    std::optional<CrossingEvent> hit;
    walk_crossings(params, *z, opts.flow.event_time_budget, sec, opts.flow,
                   [&](const CrossingEvent& ev) {
                     if (std::abs(ev.transversality) <= kTangentialBand)
                       return true;
                     if ((ev.transversality > 0.0) != (orientation > 0))
                       return true;
                     hit = ev;
                     return false;
                   });
    if (!hit)
      throw IntegrationFailure(IntegrationFailure::Kind::EventBudget,
                               opts.flow.event_time_budget,
                               "no oriented return within the time budget");
    return std::array<double, 2>{hit->z.v.real(), hit->z.u.real()};
  };

  const double h = opts.fd_step;
  const double v1s = orbit.z0.v.real();
  const auto rpv = return_point(v1s + h, 0.0);
  const auto rmv = return_point(v1s - h, 0.0);
  const auto rpu = return_point(v1s, h);
  const auto rmu = return_point(v1s, -h);
  orbit.return_trace =
      (rpv[0] - rmv[0]) / (2.0 * h) + (rpu[1] - rmu[1]) / (2.0 * h);
  return orbit;
}

} // namespace atlas
