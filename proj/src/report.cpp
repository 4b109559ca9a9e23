#include "atlas/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace atlas {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string lagrange_csv(const std::vector<CriticalPoint>& points) {
  std::string out = "label,q1,q2,value\n";
  for (const auto& p : points) {
    out += to_string(p.label);
    out += ',';
    out += fmt17(p.q.real());
    out += ',';
    out += fmt17(p.q.imag());
    out += ',';
    out += fmt17(p.value);
    out += '\n';
  }
  return out;
}

std::string certificate_json(const ConvexityCertificate& cert) {
  const auto z = cert.argmin.coords();
  std::string out = "{\n";
  out += "  \"c\": " + fmt17(cert.params.c) + ",\n";
  out += "  \"mu\": " + fmt17(cert.params.mu) + ",\n";
  out += "  \"resolution\": {\"nr\": " + std::to_string(cert.resolution.nr) +
         ", \"ntheta\": " + std::to_string(cert.resolution.ntheta) +
         ", \"nw\": " + std::to_string(cert.resolution.nw) +
         ", \"nt\": " + std::to_string(cert.resolution.nt) + "},\n";
  out += "  \"lambda_min\": " + fmt17(cert.lambda_min) + ",\n";
  out += "  \"argmin\": [" + fmt17(z[0]) + ", " + fmt17(z[1]) + ", " +
         fmt17(z[2]) + ", " + fmt17(z[3]) + "],\n";
  out += "  \"verdict\": \"" + std::string(to_string(cert.verdict)) + "\"\n";
  out += "}\n";
  return out;
}

std::string scan_csv(const ScanGrid& grid) {
  std::string out = "c,mu,lambda_min,verdict\n";
  for (const auto& cell : grid.cells) {
    out += fmt17(cell.c);
    out += ',';
    out += fmt17(cell.mu);
    out += ',';
    out += std::isnan(cell.lambda_min) ? "nan" : fmt17(cell.lambda_min);
    out += ',';
    out += cell.verdict;
    out += '\n';
  }
  return out;
}

std::string mu0_csv(const ScanGrid& grid) {
  std::string out = "c,mu0_hat\n";
  for (size_t i = 0; i < grid.c_values.size(); ++i) {
    out += fmt17(grid.c_values[i]);
    out += ',';
    out += std::isnan(grid.mu0_hat[i]) ? "nan" : fmt17(grid.mu0_hat[i]);
    out += '\n';
  }
  return out;
}

std::string slice_csv(const std::array<SliceCurve, 2>& curves) {
  std::string out = "curve_id,v1,u2\n";
  for (const auto& curve : curves)
    for (const auto& poly : curve.polylines)
      for (const auto& p : poly) {
        out += curve.curve_id;
        out += ',';
        out += fmt17(p[0]);
        out += ',';
        out += fmt17(p[1]);
        out += '\n';
      }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,v1,v2,u1,u2,K\n";
  for (const auto& s : traj.samples) {
    const auto z = s.z.coords();
    out += fmt17(s.t);
    for (double x : z) {
      out += ',';
      out += fmt17(x);
    }
    out += ',';
    out += fmt17(s.k_residual);
    out += '\n';
  }
  return out;
}

std::string orbit_json(const PeriodicOrbit& orbit) {
  const auto z = orbit.z0.coords();
  std::string out = "{\n";
  out += "  \"z0\": [" + fmt17(z[0]) + ", " + fmt17(z[1]) + ", " + fmt17(z[2]) +
         ", " + fmt17(z[3]) + "],\n";
  out += "  \"period\": " + fmt17(orbit.period) + ",\n";
  out += "  \"closure_error\": " + fmt17(orbit.closure_error) + ",\n";
  out += "  \"return_trace\": " + fmt17(orbit.return_trace) + "\n";
  out += "}\n";
  return out;
}

namespace {

std::string fmt_svg(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

} // namespace

std::string slice_svg(const std::array<SliceCurve, 2>& curves,
                      const SliceBounds& bbox, double c) {
  const double width = 720, height = 720, margin = 64;
  const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
  auto px = [&](double v1) {
    return margin + (v1 - bbox.v1_min) / (bbox.v1_max - bbox.v1_min) * plot_w;
  };
  auto py = [&](double u2) {
    return height - margin -
           (u2 - bbox.u2_min) / (bbox.u2_max - bbox.u2_min) * plot_h;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         "width=\"720\" height=\"720\" viewBox=\"0 0 720 720\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"720\" height=\"720\" fill=\"white\"/>\n"
      << "<rect x=\"" << fmt_svg(margin) << "\" y=\"" << fmt_svg(margin)
      << "\" width=\"" << fmt_svg(plot_w) << "\" height=\"" << fmt_svg(plot_h)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // ticks: 5 per axis
  for (int k = 0; k <= 4; ++k) {
    const double v1 = bbox.v1_min + (bbox.v1_max - bbox.v1_min) * k / 4.0;
    const double u2 = bbox.u2_min + (bbox.u2_max - bbox.u2_min) * k / 4.0;
    char lbl[32];
    svg << "<line x1=\"" << fmt_svg(px(v1)) << "\" y1=\""
        << fmt_svg(height - margin) << "\" x2=\"" << fmt_svg(px(v1))
        << "\" y2=\"" << fmt_svg(height - margin + 6)
        << "\" stroke=\"black\"/>\n";
    std::snprintf(lbl, sizeof(lbl), "%.3g", v1);
    svg << "<text x=\"" << fmt_svg(px(v1)) << "\" y=\""
        << fmt_svg(height - margin + 22)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << lbl << "</text>\n";
    svg << "<line x1=\"" << fmt_svg(margin - 6) << "\" y1=\"" << fmt_svg(py(u2))
        << "\" x2=\"" << fmt_svg(margin) << "\" y2=\"" << fmt_svg(py(u2))
        << "\" stroke=\"black\"/>\n";
    std::snprintf(lbl, sizeof(lbl), "%.3g", u2);
    svg << "<text x=\"" << fmt_svg(margin - 10) << "\" y=\""
        << fmt_svg(py(u2) + 4)
        << "\" font-size=\"13\" text-anchor=\"end\">" << lbl << "</text>\n";
  }
  svg << "<text x=\"" << fmt_svg(width / 2) << "\" y=\""
      << fmt_svg(height - margin + 44)
      << "\" font-size=\"15\" text-anchor=\"middle\">v1</text>\n"
      << "<text x=\"" << fmt_svg(18.0) << "\" y=\"" << fmt_svg(height / 2)
      << "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fmt_svg(height / 2) << ")\">u2</text>\n";
  char title[96];
  std::snprintf(title, sizeof(title),
                "slice v2=0, u1=0 at c=%.17g (K=0 blue, det D2K=0 red)", c);
  svg << "<text x=\"" << fmt_svg(width / 2) << "\" y=\"" << fmt_svg(36.0)
      << "\" font-size=\"15\" text-anchor=\"middle\">" << title << "</text>\n";

  const char* strokes[2] = {"#1f77b4", "#d62728"};
  for (int ci = 0; ci < 2; ++ci) {
    for (const auto& poly : curves[ci].polylines) {
      if (poly.size() < 2) continue;
      svg << "<polyline fill=\"none\" stroke=\"" << strokes[ci]
          << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < poly.size(); ++i) {
        if (i) svg << ' ';
        svg << fmt_svg(px(poly[i][0])) << ',' << fmt_svg(py(poly[i][1]));
      }
      svg << "\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace atlas
