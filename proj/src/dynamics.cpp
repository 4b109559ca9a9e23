#include "atlas/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace atlas {

namespace {

void require_away_from_sun(Cplx v) {
  if (sun_gap(v) < kSunGapGuard)
    throw SingularInput("2v^2 = 1: sun collision in regularized coordinates");
}

// Terms of K that are independent of the chart: shared by value and
// derivative code below.
struct KTerms {
  double vv;   // |v|^2
  double s;    // |2v^2 - 1|
  double uiv;  // <u, iv>
  double imuv; // Im(uv)
};

KTerms k_terms(const RegPoint& z) {
  KTerms t;
  t.vv = std::norm(z.v);
  t.s = sun_gap(z.v);
  t.uiv = inner(z.u, Cplx(0, 1) * z.v);
  t.imuv = (z.u * z.v).imag();
  return t;
}

} // namespace

double SymMat4::quadratic_form(const Tangent4& h) const {
  const auto x = h.coords();
  double q = 0.0;
  for (int i = 0; i < 4; ++i) {
    q += (*this)(i, i) * x[i] * x[i];
    for (int j = i + 1; j < 4; ++j) q += 2.0 * (*this)(i, j) * x[i] * x[j];
  }
  return q;
}

std::array<double, 4> SymMat4::apply(const std::array<double, 4>& h) const {
  std::array<double, 4> r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i] += (*this)(i, j) * h[j];
  return r;
}

double SymMat4::frobenius_norm() const {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

const char* to_string(LagrangeLabel label) {
  switch (label) {
    case LagrangeLabel::L1: return "L1";
    case LagrangeLabel::L2: return "L2";
    case LagrangeLabel::L3: return "L3";
    case LagrangeLabel::L4: return "L4";
    case LagrangeLabel::L5: return "L5";
  }
  return "?";
}

double hamiltonian(const Params& params, const PhasePoint& z) {
  const double mu = params.mu;
  if (std::abs(z.q) < kCollisionGuard)
    throw SingularInput("q = 0: earth collision");
  if (std::abs(z.q - 1.0) < kCollisionGuard)
    throw SingularInput("q = 1: sun collision");
  return 0.5 * std::norm(z.p) + inner(z.p, Cplx(0, 1) * z.q) -
         mu * z.p.imag() - (1.0 - mu) / std::abs(z.q) -
         mu / std::abs(z.q - 1.0);
}

double regularized_hamiltonian(const Params& params, const RegPoint& z) {
  require_away_from_sun(z.v);
  const double mu = params.mu;
  const KTerms t = k_terms(z);
  return 0.5 * std::norm(z.u) + 2.0 * t.vv * t.uiv - mu * t.imuv -
         0.5 * (1.0 - mu) - mu * t.vv / t.s + params.c * t.vv;
}

PhasePoint levi_civita(const RegPoint& z) {
  if (std::abs(z.v) < kCollisionGuard)
    throw SingularInput("v = 0: momentum map p = u/conj(v) singular");
  return {2.0 * z.v * z.v, z.u / std::conj(z.v)};
}

Tangent4 grad_K(const Params& params, const RegPoint& z) {
  require_away_from_sun(z.v);
  const double mu = params.mu;
  const double c = params.c;
  const KTerms t = k_terms(z);
  const double v1 = z.v.real(), v2 = z.v.imag();
  const double u1 = z.u.real(), u2 = z.u.imag();

  // grad of |v|^2/s: -(|v|^2/s^3)(8|v|^2 v - 4 conj(v)) + 2v/s
  const double s3 = t.s * t.s * t.s;
  const double p1 = -(t.vv / s3) * (8.0 * t.vv * v1 - 4.0 * v1) + 2.0 * v1 / t.s;
  const double p2 = -(t.vv / s3) * (8.0 * t.vv * v2 + 4.0 * v2) + 2.0 * v2 / t.s;

  Tangent4 g;
  g.dv = Cplx(4.0 * v1 * t.uiv + 2.0 * t.vv * u2 - mu * u2 - mu * p1 + 2.0 * c * v1,
              4.0 * v2 * t.uiv - 2.0 * t.vv * u1 - mu * u1 - mu * p2 + 2.0 * c * v2);
  g.du = Cplx(u1 - 2.0 * t.vv * v2 - mu * v2,
              u2 + 2.0 * t.vv * v1 - mu * v1);
  return g;
}

double hessian_quadratic_form(const Params& params, const RegPoint& z,
                              const Tangent4& h) {
  require_away_from_sun(z.v);
  const double mu = params.mu;
  const KTerms t = k_terms(z);
  const Cplx i(0, 1);

  const double dvv = std::norm(h.dv);
  const double vdv = inner(z.v, h.dv);
  const double u_idv = inner(z.u, i * h.dv);
  const double du_iv = inner(h.du, i * z.v);
  const double du_idv = inner(h.du, i * h.dv);
  const double im_dudv = (h.du * h.dv).imag();
  const double re_vdv = (z.v * h.dv).real();   // <conj(v), vhat>
  const double re_dv2 = (h.dv * h.dv).real();  // Re(vhat^2)

  const double s3 = t.s * t.s * t.s;
  const double s5 = s3 * t.s * t.s;
  const double a = 2.0 * t.vv * vdv - re_vdv;
  const double b = 4.0 * vdv * vdv + 2.0 * t.vv * dvv - re_dv2;

  return std::norm(h.du) + 2.0 * params.c * dvv + 4.0 * t.uiv * dvv +
         8.0 * vdv * u_idv + 8.0 * vdv * du_iv + 4.0 * t.vv * du_idv -
         2.0 * mu * im_dudv - 48.0 * mu * t.vv / s5 * a * a +
         4.0 * mu * t.vv / s3 * b + 16.0 * mu * vdv / s3 * a -
         2.0 * mu * dvv / t.s;
}

SymMat4 hessian_K(const Params& params, const RegPoint& z) {
  SymMat4 m;
  std::array<Tangent4, 4> basis;
  std::array<double, 4> diag;
  for (int i = 0; i < 4; ++i) {
    std::array<double, 4> e{};
    e[i] = 1.0;
    basis[i] = Tangent4::from_coords(e);
    diag[i] = hessian_quadratic_form(params, z, basis[i]);
    m.set(i, i, diag[i]);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const Tangent4 sum{basis[i].dv + basis[j].dv, basis[i].du + basis[j].du};
      const double q = hessian_quadratic_form(params, z, sum);
      m.set(i, j, 0.5 * (q - diag[i] - diag[j]));
    }
  }
  return m;
}

Tangent4 hamiltonian_vector_field(const Params& params, const RegPoint& z) {
  const Tangent4 g = grad_K(params, z);
  return {g.du, -g.dv};
}

double effective_potential(const Params& params, Cplx q) {
  const double mu = params.mu;
  if (std::abs(q) < kCollisionGuard)
    throw SingularInput("q = 0: earth collision");
  if (std::abs(q - 1.0) < kCollisionGuard)
    throw SingularInput("q = 1: sun collision");
  return -0.5 * std::norm(q - mu) - (1.0 - mu) / std::abs(q) -
         mu / std::abs(q - 1.0);
}

Cplx effective_potential_gradient(const Params& params, Cplx q) {
  const double mu = params.mu;
  if (std::abs(q) < kCollisionGuard || std::abs(q - 1.0) < kCollisionGuard)
    throw SingularInput("gradient of U at a collision");
  const double r0 = std::abs(q);
  const double r1 = std::abs(q - 1.0);
  return -(q - mu) + (1.0 - mu) * q / (r0 * r0 * r0) +
         mu * (q - 1.0) / (r1 * r1 * r1);
}

namespace {

// dU/dx along the axis q2 = 0, piecewise in the three collinear intervals.
double axis_gradient(double mu, double x) {
  const double towards_earth = (x > 0.0) ? 1.0 / (x * x) : -1.0 / (x * x);
  const double towards_sun =
      (x > 1.0) ? 1.0 / ((x - 1.0) * (x - 1.0)) : -1.0 / ((x - 1.0) * (x - 1.0));
  return -(x - mu) + (1.0 - mu) * towards_earth + mu * towards_sun;
}

// Bisection to width 1e-14 followed by one Newton polish (numeric slope).
double collinear_root(double mu, double lo, double hi) {
  double flo = axis_gradient(mu, lo);
  double fhi = axis_gradient(mu, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw RootFindFailure("collinear bracket [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "] has no sign change");
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    const double fm = axis_gradient(mu, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  const double h = 1e-7;
  const double slope = (axis_gradient(mu, x + h) - axis_gradient(mu, x - h)) / (2.0 * h);
  if (slope != 0.0) {
    const double polished = x - axis_gradient(mu, x) / slope;
    if (polished > lo - 1e-12 && polished < hi + 1e-12) x = polished;
  }
  return x;
}

// Expands the bracket away from the primaries until the gradient changes sign.
double expand_bracket(double mu, double start, double step, int max_doublings) {
  const double fstart = axis_gradient(mu, start);
  double x = start;
  for (int k = 0; k < max_doublings; ++k) {
    x = start + step;
    if ((axis_gradient(mu, x) > 0.0) != (fstart > 0.0)) return x;
    step *= 2.0;
  }
  throw RootFindFailure("no sign change of dU/dx scanning from " +
                        std::to_string(start));
}

} // namespace

std::vector<CriticalPoint> lagrange_points(const Params& params) {
  const double mu = params.mu;
  if (!(mu > 0.0 && mu < 1.0))
    throw InvalidParams(
        "mu in {0,1} has a critical circle, not isolated Lagrange points");

  std::vector<CriticalPoint> pts;
  const double inner_x = collinear_root(mu, 1e-9, 1.0 - 1e-9);
  const double beyond_sun = collinear_root(mu, 1.0 + 1e-9,
                                           expand_bracket(mu, 1.0 + 1e-9, 1.0, 40));
  const double opposite = collinear_root(mu, expand_bracket(mu, -1e-9, -1.0, 40),
                                         -1e-9);
  for (double x : {inner_x, beyond_sun, opposite})
    pts.push_back({LagrangeLabel::L1, Cplx(x, 0.0),
                   effective_potential(params, Cplx(x, 0.0))});

  const double root3_2 = std::sqrt(3.0) / 2.0;
  for (double sign : {-1.0, 1.0}) {
    const Cplx q(0.5, sign * root3_2);
    pts.push_back({LagrangeLabel::L1, q, effective_potential(params, q)});
  }

  std::sort(pts.begin(), pts.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.q.real() != b.q.real()) return a.q.real() < b.q.real();
    return a.q.imag() < b.q.imag();
  });
  for (size_t i = 0; i < pts.size(); ++i)
    pts[i].label = static_cast<LagrangeLabel>(i);
  return pts;
}

} // namespace atlas
