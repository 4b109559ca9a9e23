#pragma once

#include <string>

#include "atlas/convexity.hpp"
#include "atlas/flow.hpp"

namespace atlas {

/// Shortest locale-independent representation with 17 significant digits
/// (round-trip exact for 64-bit floats).
std::string fmt17(double x);

/// CSV (header row, comma separator, '.' decimal) and JSON (UTF-8, stable
/// key order) emission. All output is a deterministic function of the data.
std::string lagrange_csv(const std::vector<CriticalPoint>& points);
std::string certificate_json(const ConvexityCertificate& cert);
std::string scan_csv(const ScanGrid& grid);
std::string mu0_csv(const ScanGrid& grid);
std::string slice_csv(const std::array<SliceCurve, 2>& curves);
std::string trajectory_csv(const Trajectory& traj);
std::string orbit_json(const PeriodicOrbit& orbit);

/// Static SVG 1.1 rendering of the two slice curves with axes.
std::string slice_svg(const std::array<SliceCurve, 2>& curves,
                      const SliceBounds& bbox, double c);

} // namespace atlas
