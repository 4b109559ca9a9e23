// convexity-atlas: CLI for the Levi-Civita regularized planar restricted
// three-body problem: Lagrange points, convexity certification of the
// bounded energy component, parameter scans, slice-plane curves, regularized
// trajectories and symmetric periodic orbits.
//
// Exit codes: 0 success/convex, 1 non-convex witness, 2 invalid input,
// 3 degenerate/empty, 4 runtime integration failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "atlas/convexity.hpp"
#include "atlas/dynamics.hpp"
#include "atlas/flow.hpp"
#include "atlas/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWitness = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitRuntime = 4;

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs;
  xs.reserve(n);
  if (n == 1) {
    xs.push_back(lo);
    return xs;
  }
  for (int i = 0; i < n; ++i) xs.push_back(lo + (hi - lo) * i / (n - 1));
  return xs;
}

int effective_jobs(int jobs_flag) {
  if (const char* env = std::getenv("CONVEXITY_ATLAS_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  return jobs_flag;
}

struct ResolutionFlags {
  int nr = 40, ntheta = 64, nw = 16, nt = 8;

  void attach(CLI::App* cmd) {
    cmd->add_option("--nr", nr, "radial v samples");
    cmd->add_option("--ntheta", ntheta, "angular v samples");
    cmd->add_option("--nw", nw, "fiber direction samples");
    cmd->add_option("--nt", nt, "fiber radius samples");
  }
  atlas::Resolution resolution() const { return {nr, ntheta, nw, nt}; }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"convexity atlas for the regularized planar restricted "
               "three-body problem"};
  app.require_subcommand(1);

  // lagrange
  auto* cmd_lagrange = app.add_subcommand(
      "lagrange", "Lagrange points as CSV (label,q1,q2,value), sorted by value");
  double lag_mu = 0.0;
  std::string lag_out;
  cmd_lagrange->add_option("--mu", lag_mu, "mass ratio in (0,1)")->required();
  cmd_lagrange->add_option("--out", lag_out, "output file (default stdout)");

  // certify
  auto* cmd_certify = app.add_subcommand(
      "certify", "convexity certificate for one (c, mu) as JSON");
  double cert_c = 0.0, cert_mu = 0.0;
  std::string cert_out;
  ResolutionFlags cert_res;
  cmd_certify->add_option("--c", cert_c, "energy parameter, c > 3/2")->required();
  cmd_certify->add_option("--mu", cert_mu, "mass ratio in [0,1)")->required();
  cert_res.attach(cmd_certify);
  cmd_certify->add_option("--out", cert_out, "output file (default stdout)");

  // scan
  auto* cmd_scan = app.add_subcommand(
      "scan", "certify a (c, mu) grid; CSV columns c,mu,lambda_min,verdict");
  double scan_cmin = 0.0, scan_cmax = 0.0, scan_mumin = 0.0, scan_mumax = 0.0;
  int scan_nc = 1, scan_nmu = 1, scan_jobs = 1;
  std::string scan_out, scan_mu0_out;
  ResolutionFlags scan_res;
  cmd_scan->add_option("--c-min", scan_cmin)->required();
  cmd_scan->add_option("--c-max", scan_cmax)->required();
  cmd_scan->add_option("--nc", scan_nc, "c grid count")->required();
  cmd_scan->add_option("--mu-min", scan_mumin)->required();
  cmd_scan->add_option("--mu-max", scan_mumax)->required();
  cmd_scan->add_option("--nmu", scan_nmu, "mu grid count")->required();
  scan_res.attach(cmd_scan);
  cmd_scan->add_option("--jobs", scan_jobs,
                       "worker threads (CONVEXITY_ATLAS_JOBS overrides)");
  cmd_scan->add_option("--out", scan_out, "output file (default stdout)");
  cmd_scan->add_option("--mu0-out", scan_mu0_out,
                       "also write the heuristic per-c boundary mu0_hat(c)");

  // slice
  auto* cmd_slice = app.add_subcommand(
      "slice", "K=0 and det D2K=0 in the slice plane v2=u1=0 at mu=0 (CSV, "
               "optional SVG)");
  double slice_c = 0.0;
  std::vector<double> slice_bbox{-0.75, 0.75, -1.5, 1.5};
  int slice_nx = 256, slice_ny = 256;
  std::string slice_out, slice_svg_path;
  cmd_slice->add_option("--c", slice_c, "energy parameter, c > 3/2")->required();
  cmd_slice
      ->add_option("--bbox", slice_bbox, "v1_min v1_max u2_min u2_max")
      ->expected(4);
  cmd_slice->add_option("--nx", slice_nx, "grid cells in v1");
  cmd_slice->add_option("--ny", slice_ny, "grid cells in u2");
  cmd_slice->add_option("--svg", slice_svg_path, "also write an SVG plot");
  cmd_slice->add_option("--out", slice_out, "output file (default stdout)");

  // flow
  auto* cmd_flow = app.add_subcommand(
      "flow", "integrate the regularized flow; CSV columns t,v1,v2,u1,u2,K");
  double flow_c = 0.0, flow_mu = 0.0, flow_v1 = 0.0, flow_v2 = 0.0,
         flow_u1 = 0.0, flow_u2 = 0.0, flow_tend = 0.0;
  double flow_rtol = 1e-10, flow_atol = 1e-12;
  bool flow_surface_u2 = false;
  std::string flow_out;
  cmd_flow->add_option("--c", flow_c)->required();
  cmd_flow->add_option("--mu", flow_mu)->required();
  cmd_flow->add_option("--v1", flow_v1)->required();
  cmd_flow->add_option("--v2", flow_v2);
  cmd_flow->add_option("--u1", flow_u1);
  cmd_flow->add_option("--u2", flow_u2);
  cmd_flow->add_flag("--surface-u2", flow_surface_u2,
                     "solve u2 >= 0 from K = 0 instead of taking --u2");
  cmd_flow->add_option("--t-end", flow_tend)->required();
  cmd_flow->add_option("--rtol", flow_rtol);
  cmd_flow->add_option("--atol", flow_atol);
  cmd_flow->add_option("--out", flow_out, "output file (default stdout)");

  // orbit
  auto* cmd_orbit = app.add_subcommand(
      "orbit", "symmetric periodic orbit by reversible shooting (JSON)");
  double orb_c = 0.0, orb_mu = 0.0, orb_lo = 0.0, orb_hi = 0.0;
  double orb_rtol = 1e-10, orb_atol = 1e-12;
  bool orb_negative = false;
  std::string orb_out;
  cmd_orbit->add_option("--c", orb_c)->required();
  cmd_orbit->add_option("--mu", orb_mu)->required();
  cmd_orbit->add_option("--bracket-lo", orb_lo, "v1 bracket low end")->required();
  cmd_orbit->add_option("--bracket-hi", orb_hi, "v1 bracket high end")->required();
  cmd_orbit->add_flag("--negative-branch", orb_negative,
                      "shoot from the u2 <= 0 branch of Fix(rho)");
  cmd_orbit->add_option("--rtol", orb_rtol);
  cmd_orbit->add_option("--atol", orb_atol);
  cmd_orbit->add_option("--out", orb_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (cmd_lagrange->parsed()) {
      const auto points = atlas::lagrange_points(atlas::Params(lag_mu, 0.0));
      write_output(lag_out, atlas::lagrange_csv(points));
      return kExitOk;
    }

    if (cmd_certify->parsed()) {
      const auto cert = atlas::certify(atlas::Params(cert_mu, cert_c),
                                       cert_res.resolution());
      write_output(cert_out, atlas::certificate_json(cert));
      switch (cert.verdict) {
        case atlas::Verdict::NumericallyConvex: return kExitOk;
        case atlas::Verdict::WitnessNonConvex: return kExitWitness;
        case atlas::Verdict::Degenerate: return kExitDegenerate;
      }
      return kExitRuntime;
    }

    if (cmd_scan->parsed()) {
      const auto grid = atlas::scan(linspace(scan_cmin, scan_cmax, scan_nc),
                                    linspace(scan_mumin, scan_mumax, scan_nmu),
                                    scan_res.resolution(),
                                    effective_jobs(scan_jobs));
      write_output(scan_out, atlas::scan_csv(grid));
      if (!scan_mu0_out.empty()) write_output(scan_mu0_out, atlas::mu0_csv(grid));
      return kExitOk;
    }

    if (cmd_slice->parsed()) {
      const atlas::SliceBounds bbox{slice_bbox[0], slice_bbox[1], slice_bbox[2],
                                    slice_bbox[3]};
      const auto curves = atlas::slice_curves(slice_c, bbox, slice_nx, slice_ny);
      write_output(slice_out, atlas::slice_csv(curves));
      if (!slice_svg_path.empty())
        write_output(slice_svg_path, atlas::slice_svg(curves, bbox, slice_c));
      std::cerr << "intersections: "
                << atlas::count_curve_intersections(curves[0], curves[1])
                << "\n";
      if (curves[0].empty() && curves[1].empty()) return kExitDegenerate;
      return kExitOk;
    }

    if (cmd_flow->parsed()) {
      const atlas::Params params(flow_mu, flow_c);
      atlas::RegPoint z0{atlas::Cplx(flow_v1, flow_v2),
                         atlas::Cplx(flow_u1, flow_u2)};
      if (flow_surface_u2) {
        const auto w_hat = atlas::Cplx(0.0, 1.0);
        const auto rho =
            atlas::momentum_magnitude(params, z0.v, w_hat);
        if (!rho)
          throw atlas::InvalidParams("no u2 >= 0 surface lift at this v");
        z0.u = atlas::Cplx(flow_u1, *rho);
        if (flow_u1 != 0.0) {
          const auto lifted = atlas::lift_section_point(params, flow_v1, flow_u1);
          if (flow_v2 != 0.0 || !lifted)
            throw atlas::InvalidParams(
                "--surface-u2 with --u1 requires v2 = 0 and an on-surface lift");
          z0 = *lifted;
        }
      }
      atlas::FlowOptions opts;
      opts.tol.rel = flow_rtol;
      opts.tol.abs = flow_atol;
      const auto traj = atlas::integrate(params, z0, flow_tend, opts);
      write_output(flow_out, atlas::trajectory_csv(traj));
      return kExitOk;
    }

    if (cmd_orbit->parsed()) {
      atlas::OrbitOptions opts;
      opts.flow.tol.rel = orb_rtol;
      opts.flow.tol.abs = orb_atol;
      opts.negative_branch = orb_negative;
      const auto orbit = atlas::find_symmetric_orbit(atlas::Params(orb_mu, orb_c),
                                                     orb_lo, orb_hi, opts);
      write_output(orb_out, atlas::orbit_json(orbit));
      return kExitOk;
    }
  } catch (const atlas::InvalidParams& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const atlas::SingularInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const atlas::IntegrationFailure& e) {
    std::cerr << "integration failure at t = " << e.t << ": " << e.what()
              << "\n";
    return kExitRuntime;
  } catch (const atlas::RootFindFailure& e) {
    std::cerr << "root finding failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}
