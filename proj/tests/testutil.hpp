#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "avq/core.hpp"
#include "avq/sampling.hpp"

// Checking helpers that recompute quantities with raw Eigen arithmetic, so
// library results are judged against formulas written down independently of
// the implementation under test.

namespace testutil {

using avq::Complex;
using avq::Matrix;
using avq::Vector;

inline Complex raw_mean(const Matrix& m, const Vector& v) {
  return (v.adjoint() * m * v)(0);
}

inline double raw_spread(const Matrix& m, const Vector& v) {
  const Vector mv = m * v;
  return (mv - raw_mean(m, v) * v).norm();
}

inline Vector raw_perp(const Matrix& m, const Vector& v) {
  const Vector r = m * v - raw_mean(m, v) * v;
  return r / r.norm();
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline std::string corpus_dir() { return AVQ_CORPUS_DIR; }
inline std::string cli_path() { return AVQ_CLI_PATH; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p,
                       const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
}

inline std::filesystem::path temp_dir() {
  auto d = std::filesystem::temp_directory_path() / "avq_tests";
  std::filesystem::create_directories(d);
  return d;
}

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the CLI with the given argument string, capturing combined output.
inline CmdResult run_cli(const std::string& args) {
  const std::string cmd = "'" + cli_path() + "' " + args + " 2>&1";
  CmdResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
    result.output.append(buf, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testutil
