#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "atlas/convexity.hpp"
#include "atlas/flow.hpp"
#include "oracles.hpp"

using namespace atlas;

namespace {

// Root of 2 s^3 - 2 c s^2 + 1 = 0 inside the bounded component: independent
// oracle for the circular-orbit radius r = s^2 of the rotating Kepler
// problem at H = -c.
double circular_orbit_root(double c) {
  return oracle::bisect([c](double s) { return 2.0 * s * s * s - 2.0 * c * s * s + 1.0; },
                        0.4, 1.0);
}

// The circular orbit crosses Fix(rho) at v = (-s/sqrt(2), 0), u = (0, 1/sqrt(2)).
RegPoint circular_orbit_start(double c) {
  const double s = circular_orbit_root(c);
  return {Cplx(-s / std::sqrt(2.0), 0.0), Cplx(0.0, 1.0 / std::sqrt(2.0))};
}

RegPoint surface_point(const Params& p, double v1) {
  const auto rho = momentum_magnitude(p, Cplx(v1, 0), Cplx(0, 1));
  REQUIRE(rho.has_value());
  return {Cplx(v1, 0), Cplx(0, *rho)};
}

} // namespace

TEST_CASE("integrate: equilibrium at the collision lift (mu = 1)") {
  const Params p(1.0, 1.8);
  const RegPoint z0{Cplx(0, 0), Cplx(0, 0)};
  CHECK(regularized_hamiltonian(p, z0) == 0.0);
  const Trajectory traj = integrate(p, z0, 5.0);
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.z.v) == 0.0);
    CHECK(std::abs(s.z.u) == 0.0);
  }
  CHECK(traj.max_k_residual == 0.0);
}

TEST_CASE("integrate: rejects off-surface starts") {
  const Params p(0.5, 1.8);
  CHECK_THROWS_AS(integrate(p, {Cplx(0, 0), Cplx(0, 0)}, 1.0), InvalidParams);
}

TEST_CASE("integrate: energy conservation on Sigma_{0.9, 1.8}") {
  const Params p(0.9, 1.8);
  const Trajectory traj = integrate(p, surface_point(p, 0.1), 20.0);
  CHECK(traj.samples.size() > 50);
  CHECK(traj.max_k_residual < 1e-8);
  for (size_t i = 1; i < traj.samples.size(); ++i)
    CHECK(traj.samples[i].t > traj.samples[i - 1].t);
  // halving the tolerances reduces the drift
  FlowOptions tight;
  tight.tol.rel = 5e-11;
  tight.tol.abs = 5e-13;
  const Trajectory traj2 = integrate(p, surface_point(p, 0.1), 20.0, tight);
  CHECK(traj2.max_k_residual <= traj.max_k_residual);
}

TEST_CASE("integrate: reversibility rho flow_t rho = flow_{-t}") {
  const Params p(0.9, 1.8);
  const RegPoint z0 = surface_point(p, 0.12);
  const double t = 10.0;
  const Trajectory fwd = integrate(p, reversor(z0), t);
  const RegPoint lhs = reversor(fwd.samples.back().z);
  const Trajectory bwd = integrate(p, z0, -t);
  CHECK(bwd.samples.back().t == -t);
  CHECK(distance(lhs, bwd.samples.back().z) < 1e-8);
}

TEST_CASE("integrate: double cover flow_t(-z) = -flow_t(z)") {
  const Params p(0.6, 1.7);
  const RegPoint z0 = surface_point(p, 0.2);
  const Trajectory plus = integrate(p, z0, 8.0);
  const Trajectory minus = integrate(p, {-z0.v, -z0.u}, 8.0);
  const RegPoint& a = plus.samples.back().z;
  const RegPoint& b = minus.samples.back().z;
  CHECK(distance({-a.v, -a.u}, b) < 1e-8);
}

TEST_CASE("integrate: K is a first integral along the flow") {
  const Params p(0.0, 1.8);
  const Trajectory traj = integrate(p, circular_orbit_start(1.8), 30.0);
  for (const auto& s : traj.samples) CHECK(std::abs(s.k_residual) < 1e-9);
}

TEST_CASE("dopri5_step: fifth-order convergence on a short arc") {
  const Params p(0.9, 1.8);
  const RegPoint z0 = surface_point(p, 0.1);

  auto fixed_run = [&](double h, int n) {
    RegPoint z = z0;
    Tangent4 f = hamiltonian_vector_field(p, z);
    for (int i = 0; i < n; ++i) {
      const RkStep s = dopri5_step(p, z, h, f);
      z = s.z;
      f = s.f;
    }
    return z;
  };

  FlowOptions tight;
  tight.tol.rel = 1e-13;
  tight.tol.abs = 1e-14;
  const RegPoint ref = integrate(p, z0, 0.8, tight).samples.back().z;
  const double err_h = distance(fixed_run(0.08, 10), ref);
  const double err_h2 = distance(fixed_run(0.04, 20), ref);
  const double ratio = err_h / err_h2;
  CHECK(ratio > 32.0 / 4.0);
  CHECK(ratio < 32.0 * 4.0);
}

TEST_CASE("section_crossings: no events when the trajectory stays one-sided") {
  const Params p(0.0, 1.8);
  Section far = Section::v2_zero(+1);
  far.offset = 10.0; // the compact component never reaches v2 = 10
  const auto out = section_crossings(p, circular_orbit_start(1.8), 10.0, far);
  CHECK(out.events.empty());
  CHECK(out.tangential.empty());
}

TEST_CASE("section_crossings: crossings sit on the plane, oriented") {
  const Params p(0.0, 1.8);
  const Section sec = Section::v2_zero(+1);
  const auto out = section_crossings(p, circular_orbit_start(1.8), 40.0, sec);
  REQUIRE(out.events.size() >= 4);
  for (const auto& ev : out.events) {
    CHECK(std::abs(sec.side(ev.z)) < 1e-10);
    CHECK(ev.transversality > 1e-10);
    CHECK(std::abs(regularized_hamiltonian(p, ev.z)) < 1e-8);
  }
  // circular orbit: consecutive oriented crossings are one period apart
  std::vector<double> gaps;
  for (size_t i = 1; i < out.events.size(); ++i)
    gaps.push_back(out.events[i].t - out.events[i - 1].t);
  for (double g : gaps) CHECK(std::abs(g - gaps[0]) < 1e-8);
}

TEST_CASE("return_map: n = 0 is empty; the circular orbit is a fixed point") {
  const Params p(0.0, 1.8);
  const RegPoint z0 = circular_orbit_start(1.8);
  const Tangent4 f0 = hamiltonian_vector_field(p, z0);
  const Section sec = Section::v2_zero(f0.dv.imag() > 0 ? +1 : -1);

  CHECK(return_map(p, sec, z0, 0).empty());

  const auto iterates = return_map(p, sec, z0, 3);
  REQUIRE(iterates.size() == 3);
  for (const auto& z : iterates) CHECK(distance(z, z0) < 1e-6);
}

TEST_CASE("return_map: iterates of a nearby point stay on Sigma") {
  const Params p(0.0, 1.8);
  const RegPoint z0 = circular_orbit_start(1.8);
  const auto nearby = lift_section_point(p, z0.v.real() + 0.02, 0.0);
  REQUIRE(nearby.has_value());
  const Tangent4 f0 = hamiltonian_vector_field(p, *nearby);
  const Section sec = Section::v2_zero(f0.dv.imag() > 0 ? +1 : -1);
  const auto iterates = return_map(p, sec, *nearby, 50);
  REQUIRE(iterates.size() == 50);
  for (const auto& z : iterates) {
    CHECK(std::abs(regularized_hamiltonian(p, z)) < 1e-8);
    CHECK(std::abs(sec.side(z)) < 1e-10);
  }
}

TEST_CASE("return_map: rejects starts off the section or surface") {
  const Params p(0.0, 1.8);
  const Section sec = Section::v2_zero(+1);
  RegPoint off = circular_orbit_start(1.8);
  off.v += Cplx(0, 0.1);
  CHECK_THROWS_AS(return_map(p, sec, off, 1), InvalidParams);
}

TEST_CASE("find_symmetric_orbit: recovers the rotating-Kepler circular orbit") {
  const double c = 1.8;
  const Params p(0.0, c);
  const double s = circular_orbit_root(c);
  const double v1_star = -s / std::sqrt(2.0);

  const PeriodicOrbit orbit = find_symmetric_orbit(p, v1_star - 0.05, v1_star + 0.05);
  CHECK(orbit.closure_error < 1e-6);
  CHECK(std::abs(orbit.z0.v.real() - v1_star) < 1e-6);
  CHECK(std::abs(regularized_hamiltonian(p, orbit.z0)) < 1e-10);

  // projected circle of radius r = s^2
  const Trajectory traj = integrate(p, orbit.z0, orbit.period);
  for (const auto& sample : traj.samples) {
    const PhasePoint qp = levi_civita(sample.z);
    CHECK(std::abs(std::abs(qp.q) - s * s) < 1e-6);
  }

  // rho-symmetry of the point set: the reflected endpoint of the half orbit
  const Trajectory half = integrate(p, orbit.z0, 0.5 * orbit.period);
  const RegPoint mid = half.samples.back().z;
  CHECK(std::abs(mid.v.imag()) < 1e-7);
  CHECK(std::abs(mid.u.real()) < 1e-7);

  // an elliptic fixed point of the return map has |trace| <= 2
  CHECK(std::abs(orbit.return_trace) <= 2.5);
}

TEST_CASE("find_symmetric_orbit: rejects a bracket with no sign change") {
  const Params p(0.0, 1.8);
  CHECK_THROWS_AS(find_symmetric_orbit(p, -0.30, -0.28), RootFindFailure);
}

TEST_CASE("find_symmetric_orbit: negative branch mirrors the orbit") {
  const double c = 1.8;
  const Params p(0.0, c);
  const double v1_star = -circular_orbit_root(c) / std::sqrt(2.0);
  OrbitOptions opts;
  opts.negative_branch = true;
  // the u2 <= 0 branch carries the mirror orbit at -v1
  const PeriodicOrbit orbit =
      find_symmetric_orbit(p, -v1_star - 0.05, -v1_star + 0.05, opts);
  CHECK(orbit.closure_error < 1e-6);
  CHECK(orbit.z0.u.imag() <= 0.0);
}
