#include "atlas/convexity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace atlas {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// e(v) for the hill scans: -inf inside the sun-collision guard band, where
// the mu-term dominates with sign minus (only reachable for mu > 0).
double guarded_offset(const Params& params, Cplx v) {
  const double s = sun_gap(v);
  if (s < kSunGapGuard) return params.mu > 0.0 ? -kInf : std::norm(v) * params.c - 0.5 * (1.0 - params.mu);
  return std::norm(v) * (params.c - params.mu / s) - 0.5 * (1.0 - params.mu);
}

} // namespace

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::NumericallyConvex: return "NumericallyConvex";
    case Verdict::WitnessNonConvex: return "WitnessNonConvex";
    case Verdict::Degenerate: return "Degenerate";
  }
  return "?";
}

size_t SliceCurve::vertex_count() const {
  size_t n = 0;
  for (const auto& p : polylines) n += p.size();
  return n;
}

Cplx fiber_linear_term(const Params& params, Cplx v) {
  const Cplx i(0, 1);
  return 2.0 * std::norm(v) * (i * v) - params.mu * (i * std::conj(v));
}

double fiber_offset(const Params& params, Cplx v) {
  const double s = sun_gap(v);
  if (s < kSunGapGuard)
    throw SingularInput("2v^2 = 1: sun collision in regularized coordinates");
  return std::norm(v) * (params.c - params.mu / s) - 0.5 * (1.0 - params.mu);
}

std::optional<double> momentum_magnitude(const Params& params, Cplx v,
                                         Cplx w_hat) {
  const double b = inner(w_hat, fiber_linear_term(params, v));
  const double e = fiber_offset(params, v);
  const double disc = b * b - 2.0 * e;
  if (disc < 0.0) return std::nullopt;
  const double root = -b + std::sqrt(disc);
  if (root < 0.0) return std::nullopt;
  return root;
}

bool hill_region_test(const Params& params, Cplx v) {
  if (fiber_offset(params, v) > 0.0) return false;
  // Radial continuation from the origin decides component membership.
  const int steps = 256;
  for (int k = 1; k < steps; ++k) {
    const Cplx vk = v * (static_cast<double>(k) / steps);
    if (guarded_offset(params, vk) > 0.0) return false;
  }
  return true;
}

double hill_boundary_radius(const Params& params, double theta) {
  params.require_compact();
  const Cplx dir(std::cos(theta), std::sin(theta));
  if (guarded_offset(params, Cplx(0, 0)) >= 0.0) return 0.0;
  // The component containing 0 lies inside |v| < 1 for all c > 3/2.
  const int steps = 1024;
  double lo = 0.0;
  double hi = -1.0;
  for (int k = 1; k <= steps; ++k) {
    const double r = static_cast<double>(k) / steps;
    if (guarded_offset(params, r * dir) > 0.0) {
      hi = r;
      break;
    }
    lo = r;
  }
  if (hi < 0.0) return 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (guarded_offset(params, mid * dir) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double hill_component_radius(const Params& params, int ntheta) {
  double rmax = 0.0;
  for (int j = 0; j < ntheta; ++j)
    rmax = std::max(rmax, hill_boundary_radius(params, 2.0 * kPi * j / ntheta));
  return rmax;
}

namespace {

// Shared v-grid walk: the origin once, then n_r shells per ray.
void for_each_hill_v(const Params& params, int nr, int ntheta,
                     const std::function<void(Cplx)>& fn) {
  fn(Cplx(0, 0));
  for (int j = 0; j < ntheta; ++j) {
    const double theta = 2.0 * kPi * j / ntheta;
    const double rmax = hill_boundary_radius(params, theta);
    if (rmax <= 0.0) continue;
    const Cplx dir(std::cos(theta), std::sin(theta));
    for (int i = 1; i <= nr; ++i) fn(dir * (rmax * i / nr));
  }
}

struct Fiber {
  Cplx center;
  double radius;
};

std::optional<Fiber> fiber_disk(const Params& params, Cplx v) {
  const Cplx w = fiber_linear_term(params, v);
  const double disc = std::norm(w) - 2.0 * fiber_offset(params, v);
  if (disc < 0.0) return std::nullopt;
  return Fiber{-w, std::sqrt(disc)};
}

} // namespace

void for_each_filled_sample(const Params& params, const Resolution& res,
                            const std::function<void(const RegPoint&)>& fn) {
  params.require_compact();
  if (!res.valid()) throw InvalidParams("resolution counts must be positive");
  for_each_hill_v(params, res.nr, res.ntheta, [&](Cplx v) {
    const auto fiber = fiber_disk(params, v);
    if (!fiber) return;
    fn({v, fiber->center});
    for (int k = 0; k < res.nw; ++k) {
      const double phi = 2.0 * kPi * k / res.nw;
      const Cplx dir(std::cos(phi), std::sin(phi));
      for (int l = 1; l <= res.nt; ++l)
        fn({v, fiber->center + (fiber->radius * l / res.nt) * dir});
    }
  });
}

std::vector<RegPoint> sample_filled_domain(const Params& params,
                                           const Resolution& res) {
  std::vector<RegPoint> out;
  for_each_filled_sample(params, res, [&](const RegPoint& z) { out.push_back(z); });
  return out;
}

void for_each_surface_sample(const Params& params, const Resolution& res,
                             const std::function<void(const RegPoint&)>& fn) {
  params.require_compact();
  if (!res.valid()) throw InvalidParams("resolution counts must be positive");
  for_each_hill_v(params, res.nr, res.ntheta, [&](Cplx v) {
    const auto fiber = fiber_disk(params, v);
    if (!fiber) return;
    for (int k = 0; k < res.nw; ++k) {
      const double phi = 2.0 * kPi * k / res.nw;
      const Cplx dir(std::cos(phi), std::sin(phi));
      fn({v, fiber->center + fiber->radius * dir});
    }
  });
}

double max_momentum_on_surface(const Params& params, const Resolution& res) {
  double umax = 0.0;
  for_each_surface_sample(params, res, [&](const RegPoint& z) {
    umax = std::max(umax, std::abs(z.u));
  });
  return umax;
}

EigenSystem eigen_decomposition(const SymMat4& m) {
  double a[4][4];
  double vec[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      a[i][j] = m(i, j);
      vec[i][j] = (i == j) ? 1.0 : 0.0;
    }

  const double tol = 1e-13 * std::max(1.0, m.frobenius_norm());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
    if (std::sqrt(2.0 * off) < tol) break;

    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double apq = a[p][q];
        a[p][p] -= t * apq;
        a[q][q] += t * apq;
        a[p][q] = a[q][p] = 0.0;
        for (int r = 0; r < 4; ++r) {
          if (r != p && r != q) {
            const double arp = a[r][p], arq = a[r][q];
            a[r][p] = a[p][r] = arp - s * (arq + tau * arp);
            a[r][q] = a[q][r] = arq + s * (arp - tau * arq);
          }
          const double vrp = vec[r][p], vrq = vec[r][q];
          vec[r][p] = vrp - s * (vrq + tau * vrp);
          vec[r][q] = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a[i][i] < a[j][j]; });
  EigenSystem sys;
  for (int k = 0; k < 4; ++k) {
    sys.values[k] = a[order[k]][order[k]];
    for (int r = 0; r < 4; ++r) sys.vectors[k][r] = vec[r][order[k]];
  }
  return sys;
}

double min_eigenvalue(const SymMat4& m) { return eigen_decomposition(m).values[0]; }

ConvexityCertificate certify(const Params& params, const Resolution& res) {
  params.require_compact();
  if (!res.valid()) throw InvalidParams("resolution counts must be positive");

  ConvexityCertificate cert{params, res, kInf, RegPoint{}, Verdict::Degenerate};
  if (hill_component_radius(params, res.ntheta) < 1e-8) return cert;

  size_t count = 0;
  for_each_filled_sample(params, res, [&](const RegPoint& z) {
    const double lam = min_eigenvalue(hessian_K(params, z));
    // strict < keeps the first sample attaining the minimum
    if (lam < cert.lambda_min) {
      cert.lambda_min = lam;
      cert.argmin = z;
    }
    ++count;
  });

  if (count == 0) return cert;
  if (cert.lambda_min > kDegenerateBand)
    cert.verdict = Verdict::NumericallyConvex;
  else if (cert.lambda_min < -kDegenerateBand)
    cert.verdict = Verdict::WitnessNonConvex;
  else
    cert.verdict = Verdict::Degenerate;
  return cert;
}

ScanGrid scan(const std::vector<double>& c_values,
              const std::vector<double>& mu_values, const Resolution& res,
              int jobs) {
  for (double c : c_values)
    if (!(c > 1.5)) throw InvalidParams("scan range requires c > 3/2");
  for (double mu : mu_values)
    if (!(mu >= 0.0 && mu < 1.0))
      throw InvalidParams("scan range requires 0 <= mu < 1");

  ScanGrid grid;
  grid.c_values = c_values;
  grid.mu_values = mu_values;
  const size_t ncells = c_values.size() * mu_values.size();
  grid.cells.resize(ncells);

  // Cells are pure and independent; results land at their grid index, so the
  // output is identical for any job count or evaluation order.
  auto run_cell = [&](size_t idx) {
    const double c = c_values[idx / mu_values.size()];
    const double mu = mu_values[idx % mu_values.size()];
    ScanCell& cell = grid.cells[idx];
    cell.c = c;
    cell.mu = mu;
    try {
      const ConvexityCertificate cert = certify(Params(mu, c), res);
      cell.lambda_min = cert.lambda_min;
      cell.verdict = to_string(cert.verdict);
    } catch (const InvalidParams&) {
      cell.lambda_min = std::numeric_limits<double>::quiet_NaN();
      cell.verdict = "InvalidParams";
    } catch (const SingularInput&) {
      cell.lambda_min = std::numeric_limits<double>::quiet_NaN();
      cell.verdict = "SingularInput";
    }
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || ncells <= 1) {
    for (size_t i = 0; i < ncells; ++i) run_cell(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    const int nthreads = static_cast<int>(std::min<size_t>(jobs, ncells));
    pool.reserve(nthreads);
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < ncells; i = next.fetch_add(1))
          run_cell(i);
      });
    for (auto& th : pool) th.join();
  }

  grid.mu0_hat.assign(c_values.size(),
                      std::numeric_limits<double>::quiet_NaN());
  for (size_t ic = 0; ic < c_values.size(); ++ic) {
    size_t k = mu_values.size();
    while (k > 0 &&
           grid.cell(static_cast<int>(ic), static_cast<int>(k - 1)).verdict ==
               "NumericallyConvex")
      --k;
    if (k < mu_values.size()) grid.mu0_hat[ic] = mu_values[k];
  }
  return grid;
}

double det_hessian_kepler(double c, const RegPoint& z) {
  const double v1 = z.v.real(), v2 = z.v.imag();
  const double u1 = z.u.real(), u2 = z.u.imag();
  const double v1_2 = v1 * v1, v2_2 = v2 * v2;
  const double v1_3 = v1_2 * v1, v2_3 = v2_2 * v2;
  const double v1_4 = v1_2 * v1_2, v2_4 = v2_2 * v2_2;
  const double v1_5 = v1_4 * v1, v2_5 = v2_4 * v2;
  const double v1_6 = v1_4 * v1_2, v2_6 = v2_4 * v2_2;
  const double v1_8 = v1_4 * v1_4, v2_8 = v2_4 * v2_4;
  return 2304.0 * v1_8 + 9216.0 * v1_6 * v2_2 - 3072.0 * u2 * v1_5 +
         13824.0 * v1_4 * v2_4 - 1280.0 * c * v1_4 + 3072.0 * u1 * v1_4 * v2 -
         6144.0 * u2 * v1_3 * v2_2 + 6144.0 * u1 * v1_2 * v2_3 -
         2560.0 * c * v1_2 * v2_2 - 256.0 * u1 * u1 * v1_2 +
         9216.0 * v1_2 * v2_6 + 768.0 * u2 * u2 * v1_2 -
         3072.0 * u2 * v1 * v2_4 + 512.0 * c * u2 * v1 -
         2048.0 * u1 * u2 * v1 * v2 + 64.0 * c * c + 2304.0 * v2_8 +
         768.0 * u1 * u1 * v2_2 - 512.0 * c * u1 * v2 + 3072.0 * u1 * v2_5 -
         1280.0 * c * v2_4 - 256.0 * u2 * u2 * v2_2;
}

// ---------------------------------------------------------------------------
// Slice-plane curve extraction (marching squares with edge-wise bisection).
// ---------------------------------------------------------------------------

namespace {

// Restriction of K to {mu = 0, v2 = 0, u1 = 0}.
double slice_k(double c, double v1, double u2) {
  return 0.5 * u2 * u2 + 2.0 * v1 * v1 * v1 * u2 + c * v1 * v1 - 0.5;
}

// Restriction of the Kepler determinant polynomial to the same plane.
double slice_det(double c, double v1, double u2) {
  const double v1_2 = v1 * v1;
  const double v1_4 = v1_2 * v1_2;
  return 2304.0 * v1_4 * v1_4 - 3072.0 * u2 * v1_4 * v1 - 1280.0 * c * v1_4 +
         768.0 * u2 * u2 * v1_2 + 512.0 * c * u2 * v1 + 64.0 * c * c;
}

using SliceFn = double (*)(double, double, double);

struct Segment {
  int64_t e0, e1; // edge ids of the two endpoints
};

std::array<double, 2> refine_edge(SliceFn f, double c, std::array<double, 2> a,
                                  double fa, std::array<double, 2> b) {
  // endpoints straddle the zero set: (fa >= 0) != (f(b) >= 0)
  std::array<double, 2> mid = a;
  for (int it = 0; it < 200; ++it) {
    mid = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    const double fm = f(c, mid[0], mid[1]);
    if (std::abs(fm) < 1e-8) return mid;
    if ((fm >= 0.0) == (fa >= 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return mid;
}

SliceCurve extract_zero_set(SliceFn f, double c, const char* id,
                            const SliceBounds& bbox, int nx, int ny) {
  SliceCurve curve;
  curve.curve_id = id;
  const int nxn = nx + 1, nyn = ny + 1;
  const double dx = (bbox.v1_max - bbox.v1_min) / nx;
  const double dy = (bbox.u2_max - bbox.u2_min) / ny;

  std::vector<double> val(static_cast<size_t>(nxn) * nyn);
  auto node_x = [&](int i) { return bbox.v1_min + dx * i; };
  auto node_y = [&](int j) { return bbox.u2_min + dy * j; };
  for (int j = 0; j < nyn; ++j)
    for (int i = 0; i < nxn; ++i)
      val[static_cast<size_t>(j) * nxn + i] = f(c, node_x(i), node_y(j));
  auto value = [&](int i, int j) { return val[static_cast<size_t>(j) * nxn + i]; };

  // Edge ids: horizontal edge (i,j)-(i+1,j) and vertical edge (i,j)-(i,j+1).
  auto hedge = [&](int i, int j) { return 2 * (static_cast<int64_t>(j) * nxn + i); };
  auto vedge = [&](int i, int j) { return 2 * (static_cast<int64_t>(j) * nxn + i) + 1; };

  std::map<int64_t, std::array<double, 2>> edge_point;
  auto crossing = [&](int64_t id, int i0, int j0, int i1, int j1) {
    auto it = edge_point.find(id);
    if (it != edge_point.end()) return;
    edge_point[id] = refine_edge(f, c, {node_x(i0), node_y(j0)}, value(i0, j0),
                                 {node_x(i1), node_y(j1)});
  };

  std::vector<Segment> segments;
  auto emit = [&](int64_t e0, int64_t e1) { segments.push_back({e0, e1}); };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const bool bl = value(i, j) >= 0.0;
      const bool br = value(i + 1, j) >= 0.0;
      const bool tr = value(i + 1, j + 1) >= 0.0;
      const bool tl = value(i, j + 1) >= 0.0;
      const int config = (bl ? 1 : 0) | (br ? 2 : 0) | (tr ? 4 : 0) | (tl ? 8 : 0);
      if (config == 0 || config == 15) continue;

      const int64_t bottom = hedge(i, j), top = hedge(i, j + 1);
      const int64_t left = vedge(i, j), right = vedge(i + 1, j);
      auto need_bottom = [&] { crossing(bottom, i, j, i + 1, j); };
      auto need_top = [&] { crossing(top, i, j + 1, i + 1, j + 1); };
      auto need_left = [&] { crossing(left, i, j, i, j + 1); };
      auto need_right = [&] { crossing(right, i + 1, j, i + 1, j + 1); };

      switch (config) {
        case 1: case 14:
          need_bottom(); need_left(); emit(bottom, left); break;
        case 2: case 13:
          need_bottom(); need_right(); emit(bottom, right); break;
        case 3: case 12:
          need_left(); need_right(); emit(left, right); break;
        case 4: case 11:
          need_top(); need_right(); emit(top, right); break;
        case 6: case 9:
          need_bottom(); need_top(); emit(bottom, top); break;
        case 7: case 8:
          need_left(); need_top(); emit(left, top); break;
        case 5: case 10: {
          need_bottom(); need_top(); need_left(); need_right();
          const double center =
              f(c, node_x(i) + 0.5 * dx, node_y(j) + 0.5 * dy);
          const bool center_in = center >= 0.0;
          const bool pair_with_corners = (config == 5) ? center_in : !center_in;
          if (pair_with_corners) {
            emit(bottom, right);
            emit(top, left);
          } else {
            emit(bottom, left);
            emit(top, right);
          }
          break;
        }
        default: break;
      }
    }
  }

  // Stitch segments into chains on shared edge ids.
  std::map<int64_t, std::vector<size_t>> by_edge;
  for (size_t s = 0; s < segments.size(); ++s) {
    by_edge[segments[s].e0].push_back(s);
    by_edge[segments[s].e1].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  for (size_t start = 0; start < segments.size(); ++start) {
    if (used[start]) continue;
    std::vector<int64_t> chain{segments[start].e0, segments[start].e1};
    used[start] = true;
    for (int dir = 0; dir < 2; ++dir) {
      for (;;) {
        const int64_t tip = dir == 0 ? chain.back() : chain.front();
        size_t next = segments.size();
        for (size_t s : by_edge[tip])
          if (!used[s]) { next = s; break; }
        if (next == segments.size()) break;
        used[next] = true;
        const int64_t other =
            segments[next].e0 == tip ? segments[next].e1 : segments[next].e0;
        if (dir == 0)
          chain.push_back(other);
        else
          chain.insert(chain.begin(), other);
      }
    }
    std::vector<std::array<double, 2>> poly;
    poly.reserve(chain.size());
    for (int64_t e : chain) poly.push_back(edge_point.at(e));
    curve.polylines.push_back(std::move(poly));
  }
  return curve;
}

} // namespace

std::array<SliceCurve, 2> slice_curves(double c, const SliceBounds& bbox,
                                       int nx, int ny) {
  if (!(c > 1.5)) throw InvalidParams("slice extraction requires c > 3/2");
  if (nx < 2 || ny < 2) throw InvalidParams("slice grid too coarse");
  if (!(bbox.v1_min < bbox.v1_max && bbox.u2_min < bbox.u2_max))
    throw InvalidParams("slice bounding box is empty");
  return {extract_zero_set(slice_k, c, "K=0", bbox, nx, ny),
          extract_zero_set(slice_det, c, "detD2K=0", bbox, nx, ny)};
}

namespace {

bool segments_intersect(const std::array<double, 2>& p1,
                        const std::array<double, 2>& p2,
                        const std::array<double, 2>& q1,
                        const std::array<double, 2>& q2) {
  auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                  const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

} // namespace

int count_curve_intersections(const SliceCurve& a, const SliceCurve& b) {
  int hits = 0;
  for (const auto& pa : a.polylines)
    for (size_t i = 0; i + 1 < pa.size(); ++i)
      for (const auto& pb : b.polylines)
        for (size_t j = 0; j + 1 < pb.size(); ++j)
          if (segments_intersect(pa[i], pa[i + 1], pb[j], pb[j + 1])) ++hits;
  return hits;
}

// ---------------------------------------------------------------------------
// Non-convexity witness search on the surface.
// ---------------------------------------------------------------------------

namespace {

// Surface point from (r, theta, phi): v = r e^{i theta}, u along e^{i phi}
// with |u| solved from K = 0. +inf objective when the chart misses Sigma.
std::optional<RegPoint> surface_chart(const Params& params, double r,
                                      double theta, double phi) {
  const Cplx v = r * Cplx(std::cos(theta), std::sin(theta));
  if (sun_gap(v) < kSunGapGuard) return std::nullopt;
  const Cplx w_hat(std::cos(phi), std::sin(phi));
  const auto rho = momentum_magnitude(params, v, w_hat);
  if (!rho) return std::nullopt;
  return RegPoint{v, *rho * w_hat};
}

double chart_objective(const Params& params, double r, double theta,
                       double phi) {
  if (r < 0.0) return kInf;
  const auto z = surface_chart(params, r, theta, phi);
  if (!z) return kInf;
  return min_eigenvalue(hessian_K(params, *z));
}

} // namespace

std::optional<RegPoint> nonconvexity_witness(const Params& params,
                                             const Resolution& res) {
  params.require_compact();

  double best = kInf;
  double best_r = 0.0, best_theta = 0.0, best_phi = 0.0;
  for (int j = 0; j < res.ntheta; ++j) {
    const double theta = 2.0 * kPi * j / res.ntheta;
    const double rmax = hill_boundary_radius(params, theta);
    for (int i = 0; i <= res.nr; ++i) {
      const double r = rmax * i / res.nr;
      for (int k = 0; k < res.nw; ++k) {
        const double phi = 2.0 * kPi * k / res.nw;
        const double lam = chart_objective(params, r, theta, phi);
        if (lam < best) {
          best = lam;
          best_r = r;
          best_theta = theta;
          best_phi = phi;
        }
      }
      if (i == 0) break; // the origin fiber does not depend on theta
    }
  }
  if (!(best < kInf)) return std::nullopt;

  // Deterministic pattern-search descent in the surface chart.
  double step_r = hill_component_radius(params, res.ntheta) / res.nr;
  double step_a = 2.0 * kPi / res.ntheta;
  for (int it = 0; it < 200 && (step_r > 1e-10 || step_a > 1e-10); ++it) {
    bool improved = false;
    const double cand[6][3] = {
        {best_r + step_r, best_theta, best_phi},
        {best_r - step_r, best_theta, best_phi},
        {best_r, best_theta + step_a, best_phi},
        {best_r, best_theta - step_a, best_phi},
        {best_r, best_theta, best_phi + step_a},
        {best_r, best_theta, best_phi - step_a},
    };
    for (const auto& x : cand) {
      const double lam = chart_objective(params, x[0], x[1], x[2]);
      if (lam < best) {
        best = lam;
        best_r = x[0];
        best_theta = x[1];
        best_phi = x[2];
        improved = true;
      }
    }
    if (!improved) {
      step_r *= 0.5;
      step_a *= 0.5;
    }
  }

  if (best >= 0.0) return std::nullopt;
  return surface_chart(params, best_r, best_theta, best_phi);
}

} // namespace atlas
