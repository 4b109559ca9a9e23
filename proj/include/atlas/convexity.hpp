#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "atlas/dynamics.hpp"

namespace atlas {

/// Sample counts for covering the filled domain: (radial x angular) grid for
/// v over the Hill component, (directions x radii) for each u-disk fiber.
struct Resolution {
  int nr = 40;
  int ntheta = 64;
  int nw = 16;
  int nt = 8;

  bool valid() const { return nr > 0 && ntheta > 0 && nw > 0 && nt > 0; }
};

struct SurfaceSample {
  RegPoint z;        // on {K = 0}, |K| < 1e-10
  double lambda_min; // smallest eigenvalue of D^2 K at z
};

enum class Verdict { NumericallyConvex, WitnessNonConvex, Degenerate };
const char* to_string(Verdict verdict);

/// lambda_min within this band of zero is reported as Degenerate rather
/// than forced into a verdict.
inline constexpr double kDegenerateBand = 1e-12;

struct ConvexityCertificate {
  Params params;
  Resolution resolution;
  double lambda_min;
  RegPoint argmin;
  Verdict verdict;
};

struct ScanCell {
  double c, mu;
  double lambda_min;   // NaN when the cell errored
  std::string verdict; // verdict name, or the per-cell error kind
};

struct ScanGrid {
  std::vector<double> c_values, mu_values;
  std::vector<ScanCell> cells;  // row-major, sorted by (c, mu)
  std::vector<double> mu0_hat;  // per-c heuristic boundary; NaN if undefined

  const ScanCell& cell(int ic, int imu) const {
    return cells[static_cast<size_t>(ic) * mu_values.size() + imu];
  }
};

/// One marching-squares zero-set, as stitched polylines in the (v1, u2)
/// slice plane {v2 = 0, u1 = 0}.
struct SliceCurve {
  std::string curve_id; // "K=0" or "detD2K=0"
  std::vector<std::vector<std::array<double, 2>>> polylines;

  bool empty() const { return polylines.empty(); }
  size_t vertex_count() const;
};

struct SliceBounds {
  double v1_min = -0.75, v1_max = 0.75;
  double u2_min = -1.5, u2_max = 1.5;
};

/// w(v) = 2|v|^2 iv - mu i conj(v): the u-gradient of K at u = 0, so that
/// K(v,u) = 1/2|u|^2 + <u, w(v)> + e(v).
Cplx fiber_linear_term(const Params& params, Cplx v);

/// e(v) = K(v, 0) = |v|^2 (c - mu/|2v^2-1|) - (1-mu)/2.
double fiber_offset(const Params& params, Cplx v);

/// Nonnegative root |u| of K(v, |u| w_hat) = 0, from the explicit quadratic;
/// nullopt when no nonnegative root exists. w_hat must be a unit vector.
std::optional<double> momentum_magnitude(const Params& params, Cplx v,
                                         Cplx w_hat);

/// True iff e(v) <= 0 and v is reached from the origin by radial
/// continuation inside {e <= 0} (earth-component membership).
bool hill_region_test(const Params& params, Cplx v);

/// Largest r with e(r e^{i theta}) <= 0 along the ray from the origin
/// (first sign change, refined by bisection). 0 when the component
/// degenerates.
double hill_boundary_radius(const Params& params, double theta);

/// max over theta of hill_boundary_radius at the given angular resolution.
double hill_component_radius(const Params& params, int ntheta);

/// Streams points covering the earth component of {K <= 0}: v on the polar
/// grid of the Hill component, u over the exact disk fiber
/// {|u + w(v)| <= sqrt(|w|^2 - 2e)}. Every yielded point has K <= 1e-10.
void for_each_filled_sample(const Params& params, const Resolution& res,
                            const std::function<void(const RegPoint&)>& fn);

std::vector<RegPoint> sample_filled_domain(const Params& params,
                                           const Resolution& res);

/// Streams points of the surface {K = 0}: fiber-boundary circles over the
/// v grid (nt is ignored). Every yielded point has |K| < 1e-10.
void for_each_surface_sample(const Params& params, const Resolution& res,
                             const std::function<void(const RegPoint&)>& fn);

/// max |u| over the surface sample set (attained at the fiber point
/// opposite the fiber center).
double max_momentum_on_surface(const Params& params, const Resolution& res);

/// Eigenvalues (ascending) and matching eigenvectors, by cyclic Jacobi
/// rotations to off-diagonal norm below 1e-13 (relative to the matrix norm).
struct EigenSystem {
  std::array<double, 4> values;
  std::array<std::array<double, 4>, 4> vectors; // vectors[k] pairs values[k]
};
EigenSystem eigen_decomposition(const SymMat4& m);

/// Smallest eigenvalue; exact for diagonal input.
double min_eigenvalue(const SymMat4& m);

/// Minimum of min_eigenvalue(hessian_K) over the sampled filled domain.
/// Requires mu < 1 and c > 3/2. Pure function of (params, resolution).
ConvexityCertificate certify(const Params& params,
                             const Resolution& res = Resolution{});

/// certify on every (c, mu) grid cell; cells are independent and evaluated
/// on `jobs` worker threads with a deterministic by-index reduction, so the
/// result does not depend on jobs or evaluation order. mu0_hat(c) is the
/// smallest tested mu such that every tested mu' >= mu is NumericallyConvex
/// (a heuristic: monotonicity in mu is not established).
ScanGrid scan(const std::vector<double>& c_values,
              const std::vector<double>& mu_values,
              const Resolution& res = Resolution{}, int jobs = 1);

/// The closed-form degree-8 polynomial for det D^2 K in the rotating Kepler
/// case mu = 0, evaluated verbatim. Proportional to the numeric determinant
/// of hessian_K with one global constant (16).
double det_hessian_kepler(double c, const RegPoint& z);

/// Zero sets of the slice restrictions (mu = 0, v2 = u1 = 0) of K and of the
/// Kepler determinant polynomial, extracted by marching squares on an
/// (nx x ny)-cell grid; vertices refined along grid edges to |residual| < 1e-8.
std::array<SliceCurve, 2> slice_curves(double c, const SliceBounds& bbox,
                                       int nx = 256, int ny = 256);

/// Number of transversal segment-segment intersections between two curves.
int count_curve_intersections(const SliceCurve& a, const SliceCurve& b);

/// Searches the surface for min_eigenvalue(hessian_K) < 0: best grid sample,
/// then deterministic pattern-search descent in surface parameters. Returns
/// a point with lambda_min < 0 and |K| < 1e-10, or nullopt.
std::optional<RegPoint> nonconvexity_witness(const Params& params,
                                             const Resolution& res = Resolution{});

} // namespace atlas
