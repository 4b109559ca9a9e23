#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

// End-to-end checks of the convexity-atlas binary: flag parsing, exit codes,
// and byte-stable output. The binary path arrives via CONVEXITY_ATLAS_BIN.

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

std::string binary_path() {
  const char* bin = std::getenv("CONVEXITY_ATLAS_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "CONVEXITY_ATLAS_BIN must point at the CLI");
  return bin;
}

RunResult run_raw(const std::string& cmd) {
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

RunResult run(const std::string& args, bool merge_stderr = false) {
  return run_raw(binary_path() + " " + args +
                 (merge_stderr ? " 2>&1" : " 2>/dev/null"));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double json_number(const std::string& json, const std::string& key) {
  const auto pos = json.find("\"" + key + "\": ");
  REQUIRE(pos != std::string::npos);
  return std::strtod(json.c_str() + pos + key.size() + 4, nullptr);
}

const char* kSmallRes = "--nr 10 --ntheta 16 --nw 6 --nt 4";

} // namespace

TEST_CASE("lagrange: CSV rows sorted by value, exit codes") {
  const RunResult r = run("lagrange --mu 0.5");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("label,q1,q2,value\n", 0) == 0);
  CHECK(r.out.find("L1,0.5,0,-2\n") != std::string::npos);

  CHECK(run("lagrange --mu 0").exit_code == 2);
  CHECK(run("lagrange --mu 1").exit_code == 2);

  const RunResult small = run("lagrange --mu 1e-4");
  CHECK(small.exit_code == 0);
  const auto l1_pos = small.out.find("L1,");
  REQUIRE(l1_pos != std::string::npos);
  // value is the 4th field of the L1 row
  std::istringstream row(small.out.substr(l1_pos));
  std::string field;
  for (int i = 0; i < 3; ++i) std::getline(row, field, ',');
  std::getline(row, field, '\n');
  CHECK(std::abs(std::strtod(field.c_str(), nullptr) + 1.5) < 0.05);
}

TEST_CASE("certify: verdict exit codes and stable JSON key order") {
  const RunResult witness = run(std::string("certify --c 1.601 --mu 0 ") + kSmallRes);
  CHECK(witness.exit_code == 1);
  CHECK(witness.out.find("\"verdict\": \"WitnessNonConvex\"") != std::string::npos);

  const RunResult convex = run(std::string("certify --c 1.8 --mu 0.9999 ") + kSmallRes);
  CHECK(convex.exit_code == 0);
  CHECK(convex.out.find("\"verdict\": \"NumericallyConvex\"") != std::string::npos);
  CHECK(json_number(convex.out, "lambda_min") > 0.0);

  // stable key order
  const size_t pc = convex.out.find("\"c\"");
  const size_t pmu = convex.out.find("\"mu\"");
  const size_t pres = convex.out.find("\"resolution\"");
  const size_t plam = convex.out.find("\"lambda_min\"");
  const size_t parg = convex.out.find("\"argmin\"");
  const size_t pver = convex.out.find("\"verdict\"");
  CHECK(pc < pmu);
  CHECK(pmu < pres);
  CHECK(pres < plam);
  CHECK(plam < parg);
  CHECK(parg < pver);

  CHECK(run("certify --c 1.4 --mu 0.5").exit_code == 2);
  CHECK(run("certify --c 1.8 --mu 1").exit_code == 2);
  CHECK(run("certify --c 1.8").exit_code == 2); // missing required flag
}

TEST_CASE("scan: 1x1 reproduces certify bit-for-bit; jobs leave bytes fixed") {
  const RunResult cert = run(std::string("certify --c 1.75 --mu 0.25 ") + kSmallRes);
  const RunResult grid = run(
      std::string("scan --c-min 1.75 --c-max 1.75 --nc 1 --mu-min 0.25 "
                  "--mu-max 0.25 --nmu 1 ") + kSmallRes);
  CHECK(grid.exit_code == 0);
  // the CSV carries the identical 17-digit lambda_min
  char lambda_str[64];
  std::snprintf(lambda_str, sizeof(lambda_str), "%.17g",
                json_number(cert.out, "lambda_min"));
  CHECK(grid.out.find(std::string(",") + lambda_str + ",") != std::string::npos);

  const std::string scan_args =
      std::string("scan --c-min 1.6 --c-max 1.9 --nc 2 --mu-min 0 --mu-max "
                  "0.9 --nmu 3 ") + kSmallRes;
  const RunResult serial = run(scan_args + " --jobs 1");
  const RunResult parallel = run(scan_args + " --jobs 8");
  CHECK(serial.exit_code == 0);
  CHECK(serial.out == parallel.out);
  CHECK(serial.out.rfind("c,mu,lambda_min,verdict\n", 0) == 0);

  // environment variable overrides --jobs
  const RunResult env_run =
      run_raw("env CONVEXITY_ATLAS_JOBS=3 " + binary_path() + " " + scan_args +
              " --jobs 1 2>/dev/null");
  CHECK(env_run.out == serial.out);
}

TEST_CASE("scan: a 20x20 window straddling the convexity boundary has both verdicts") {
  const RunResult r = run(
      std::string("scan --c-min 1.6 --c-max 2.5 --nc 20 --mu-min 0.5 "
                  "--mu-max 0.9999 --nmu 20 --jobs 8 ") + kSmallRes);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("NumericallyConvex") != std::string::npos);
  CHECK(r.out.find("WitnessNonConvex") != std::string::npos);
  // one row per cell, sorted by (c, mu)
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  double prev_c = -1e300, prev_mu = -1e300;
  while (std::getline(lines, line)) {
    double c, mu;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &c, &mu) == 2);
    CHECK((c > prev_c || (c == prev_c && mu > prev_mu)));
    prev_c = c;
    prev_mu = mu;
    ++rows;
  }
  CHECK(rows == 400);
}

TEST_CASE("slice: curves, intersections report, determinism, empty bbox") {
  const std::string csv_a = "/tmp/atlas_slice_a.csv";
  const std::string csv_b = "/tmp/atlas_slice_b.csv";
  const std::string svg_a = "/tmp/atlas_slice_a.svg";
  const std::string svg_b = "/tmp/atlas_slice_b.svg";

  const RunResult r = run("slice --c 1.601 --nx 96 --ny 96 --out " + csv_a +
                              " --svg " + svg_a,
                          /*merge_stderr=*/true);
  CHECK(r.exit_code == 0);
  const auto ipos = r.out.find("intersections: ");
  REQUIRE(ipos != std::string::npos);
  CHECK(std::atoi(r.out.c_str() + ipos + 15) >= 1);

  const std::string csv = slurp(csv_a);
  CHECK(csv.rfind("curve_id,v1,u2\n", 0) == 0);
  CHECK(csv.find("K=0,") != std::string::npos);
  CHECK(csv.find("detD2K=0,") != std::string::npos);

  // byte-identical rerun
  run("slice --c 1.601 --nx 96 --ny 96 --out " + csv_b + " --svg " + svg_b);
  CHECK(slurp(csv_a) == slurp(csv_b));
  CHECK(slurp(svg_a) == slurp(svg_b));
  CHECK(slurp(svg_a).rfind("<?xml", 0) == 0);

  CHECK(run("slice --c 2.0 --bbox 5 6 5 6 --nx 24 --ny 24").exit_code == 3);
}

TEST_CASE("flow: surface runs conserve K; off-surface starts exit 2") {
  CHECK(run("flow --c 1.8 --mu 0.9 --v1 0.3 --u2 0.9 --t-end 1").exit_code == 2);

  // a sloppy tolerance trips the drift bound: runtime failure, exit 4
  CHECK(run("flow --c 1.8 --mu 0.9 --v1 0.1 --surface-u2 --t-end 50 "
            "--rtol 5e-2").exit_code == 4);

  const RunResult r =
      run("flow --c 1.8 --mu 0.9 --v1 0.1 --surface-u2 --t-end 10");
  CHECK(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t,v1,v2,u1,u2,K");
  double prev_t = -1.0;
  int rows = 0;
  while (std::getline(lines, line)) {
    double t, v1, v2, u1, u2, k;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &t, &v1, &v2,
                        &u1, &u2, &k) == 6);
    CHECK(t > prev_t);
    prev_t = t;
    CHECK(std::abs(k) < 1e-8);
    ++rows;
  }
  CHECK(rows > 20);
}

TEST_CASE("orbit: circular-orbit radius against the cubic-root oracle") {
  const RunResult r =
      run("orbit --c 1.8 --mu 0 --bracket-lo -0.52 --bracket-hi -0.42");
  CHECK(r.exit_code == 0);
  CHECK(json_number(r.out, "closure_error") < 1e-6);

  // independent 1D bisection for 2 s^3 - 2 c s^2 + 1 = 0
  double lo = 0.4, hi = 1.0;
  auto f = [](double s) { return 2 * s * s * s - 2 * 1.8 * s * s + 1.0; };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) > 0) == (f(lo) > 0))
      lo = mid;
    else
      hi = mid;
  }
  const double s = 0.5 * (lo + hi);

  // z0 = (v1, 0, 0, u2): the projected radius is |q| = 2 v1^2 = s^2
  const auto zpos = r.out.find("\"z0\": [");
  REQUIRE(zpos != std::string::npos);
  const double v1 = std::strtod(r.out.c_str() + zpos + 7, nullptr);
  CHECK(std::abs(2.0 * v1 * v1 - s * s) < 1e-6);

  CHECK(run("orbit --c 1.8 --mu 0 --bracket-lo -0.30 --bracket-hi -0.28")
            .exit_code == 4);
}
