#pragma once

#include <array>
#include <complex>
#include <vector>

#include "atlas/params.hpp"

namespace atlas {

using Cplx = std::complex<double>;

/// Euclidean inner product on R^2 identified with C.
/// Note inner(p, i*q) = p2 q1 - p1 q2.
inline double inner(Cplx a, Cplx b) {
  return a.real() * b.real() + a.imag() * b.imag();
}

/// |2v^2 - 1|: the regularized distance to the sun collision (|q - 1|).
inline double sun_gap(Cplx v) {
  const double re = 2.0 * (v.real() * v.real() - v.imag() * v.imag()) - 1.0;
  const double im = 4.0 * v.real() * v.imag();
  return std::hypot(re, im);
}

/// Evaluations reject |2v^2 - 1| below this rather than returning huge values.
inline constexpr double kSunGapGuard = 1e-9;

/// Point-collision guard for q in {0, 1} and v = 0.
inline constexpr double kCollisionGuard = 1e-12;

/// Rotating-frame position and momentum; earth at the origin, sun at 1.
struct PhasePoint {
  Cplx q, p;
};

/// Levi-Civita coordinates: q = 2v^2, p = u / conj(v).
struct RegPoint {
  Cplx v, u;

  std::array<double, 4> coords() const {
    return {v.real(), v.imag(), u.real(), u.imag()};
  }
  static RegPoint from_coords(const std::array<double, 4>& z) {
    return {Cplx(z[0], z[1]), Cplx(z[2], z[3])};
  }
};

inline double distance(const RegPoint& a, const RegPoint& b) {
  return std::sqrt(std::norm(a.v - b.v) + std::norm(a.u - b.u));
}

/// A variation (vhat, uhat) of a RegPoint; also used for 4-vectors of
/// partial derivatives in the fixed coordinate order (v1, v2, u1, u2).
struct Tangent4 {
  Cplx dv, du;

  std::array<double, 4> coords() const {
    return {dv.real(), dv.imag(), du.real(), du.imag()};
  }
  static Tangent4 from_coords(const std::array<double, 4>& h) {
    return {Cplx(h[0], h[1]), Cplx(h[2], h[3])};
  }
  double norm() const { return std::sqrt(std::norm(dv) + std::norm(du)); }
};

/// Symmetric 4x4 matrix in coordinate order (v1, v2, u1, u2), stored as the
/// upper triangle so that symmetry is structural.
class SymMat4 {
 public:
  double operator()(int i, int j) const { return a_[index(i, j)]; }
  void set(int i, int j, double value) { a_[index(i, j)] = value; }

  /// h^T M h; equals the bilinear expansion by construction.
  double quadratic_form(const Tangent4& h) const;

  /// M h as a 4-vector.
  std::array<double, 4> apply(const std::array<double, 4>& h) const;

  double frobenius_norm() const;

 private:
  static int index(int i, int j) {
    if (i > j) std::swap(i, j);
    static constexpr int row_start[4] = {0, 4, 7, 9};
    return row_start[i] + (j - i);
  }
  std::array<double, 10> a_{};
};

enum class LagrangeLabel { L1, L2, L3, L4, L5 };
const char* to_string(LagrangeLabel label);

/// A critical point of the effective potential, labelled by increasing H.
struct CriticalPoint {
  LagrangeLabel label;
  Cplx q;
  double value;
};

/// H(q,p) = 1/2|p|^2 + <p,iq> - <p,i mu> - (1-mu)/|q| - mu/|q-1|.
double hamiltonian(const Params& params, const PhasePoint& z);

/// K_{mu,c}(v,u) = 1/2|u|^2 + 2|v|^2<u,iv> - mu Im(uv) - (1-mu)/2
///               - mu|v|^2/|2v^2-1| + c|v|^2,
/// i.e. |v|^2 (H(q,p) + c) under the Levi-Civita map.
double regularized_hamiltonian(const Params& params, const RegPoint& z);

/// The 2:1 Levi-Civita map (v,u) -> (2v^2, u/conj(v)); requires v != 0.
PhasePoint levi_civita(const RegPoint& z);

/// Partial derivatives of K in the order (v1, v2, u1, u2).
Tangent4 grad_K(const Params& params, const RegPoint& z);

/// Hessian of K, assembled by polarizing the closed-form quadratic form
/// over the coordinate basis directions and their pairwise sums.
SymMat4 hessian_K(const Params& params, const RegPoint& z);

/// D^2 K at z applied to (h, h); the closed form behind hessian_K.
double hessian_quadratic_form(const Params& params, const RegPoint& z,
                              const Tangent4& h);

/// Canonical equations (dK/du, -dK/dv) as (v1dot, v2dot, u1dot, u2dot).
/// The conformal factor 4 between Re(dq ^ dpbar) and Re(dv ^ dubar) is
/// dropped: the flow is a constant time reparameterization of the original.
Tangent4 hamiltonian_vector_field(const Params& params, const RegPoint& z);

/// U(q) = -1/2|q-mu|^2 - (1-mu)/|q| - mu/|q-1|. Critical points of U are the
/// q-projections of critical points of H, and U there equals H.
double effective_potential(const Params& params, Cplx q);

/// Gradient of the effective potential.
Cplx effective_potential_gradient(const Params& params, Cplx q);

/// The five Lagrange points for 0 < mu < 1, sorted by increasing value.
/// Collinear points from bracketed 1D root-finding on the axis; triangular
/// points at (1/2, +-sqrt(3)/2).
std::vector<CriticalPoint> lagrange_points(const Params& params);

} // namespace atlas
