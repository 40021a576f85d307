#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "testutil.hpp"

using nlohmann::json;
using testutil::run_cli;

namespace {

std::string corpus_file(const std::string& name) {
  return (std::filesystem::path(testutil::corpus_dir()) / name).string();
}

std::string quoted(const std::filesystem::path& p) {
  return "'" + p.string() + "'";
}

// Two basis_amplitudes objects describe the same state.
void check_same_amplitudes(const json& a, const json& b) {
  REQUIRE(a.size() == b.size());
  for (const auto& [label, value] : a.items()) {
    REQUIRE_MESSAGE(b.contains(label), "missing basis state " << label);
    CHECK(std::abs(value["re"].get<double>() -
                   b[label]["re"].get<double>()) <= 1e-10);
    CHECK(std::abs(value["im"].get<double>() -
                   b[label]["im"].get<double>()) <= 1e-10);
  }
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("decompose writes a complete report") {
  const auto out = testutil::temp_dir() / "cli_bell.json";
  const auto r = run_cli("decompose " + corpus_file("01_bell.qc") +
                         " --json " + quoted(out));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);

  const json j = json::parse(testutil::read_file(out));
  CHECK(j["schema_version"] == 1);
  CHECK(j["circuit"] == "bell");
  CHECK(j["n_qubits"] == 2);
  CHECK(j["partition"] == "singles");
  CHECK(j["leaf_count"].get<std::size_t>() == j["leaves"].size());
  CHECK(j["reconstruction_residual"].get<double>() <= 1e-10);
  CHECK(j["basis_amplitudes"].contains("00"));
  CHECK(j["basis_amplitudes"].contains("11"));
  for (const auto& leaf : j["leaves"]) {
    CHECK(leaf.contains("path"));
    CHECK(leaf.contains("amplitude"));
    CHECK(leaf.contains("state"));
  }
}

TEST_CASE("the report goes to stdout when no destination is given") {
  const auto r = run_cli("decompose " + corpus_file("02_ghz3.qc"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const json j = json::parse(r.output);
  CHECK(j["partition"] == "whole");
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
  const auto dir = testutil::temp_dir();
  const auto a = dir / "cli_det_a.json";
  const auto b = dir / "cli_det_b.json";
  const auto c = dir / "cli_det_c.json";
  const std::string base = "decompose " + corpus_file("08_grover3_m5.qc");
  REQUIRE(run_cli(base + " --json " + quoted(a)).exit_code == 0);
  REQUIRE(run_cli(base + " --json " + quoted(b)).exit_code == 0);
  REQUIRE(run_cli(base + " --threads 4 --json " + quoted(c)).exit_code == 0);

  const std::string first = testutil::read_file(a);
  CHECK(first == testutil::read_file(b));
  CHECK(first == testutil::read_file(c));
  CHECK_FALSE(first.empty());
}

TEST_CASE("a partition override reshapes the tree") {
  const auto out = testutil::temp_dir() / "cli_whole.json";
  const auto r = run_cli("decompose " + corpus_file("01_bell.qc") +
                         " --partition whole --json " + quoted(out));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const json j = json::parse(testutil::read_file(out));
  CHECK(j["partition"] == "whole");
  CHECK(j["n_groups"] == 1);
  CHECK(j["leaves"].size() <= 2);
}

TEST_CASE("rebase sections carry their own residual") {
  const auto out = testutil::temp_dir() / "cli_rebase.json";
  const auto r = run_cli("decompose " + corpus_file("17_rebase_plus_scaled.qc") +
                         " --json " + quoted(out));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const json j = json::parse(testutil::read_file(out));
  REQUIRE(j.contains("rebase"));
  CHECK(j["rebase"]["q"] == 1.0);
  CHECK(j["rebase"]["reconstruction_residual"].get<double>() <= 1e-10);
  CHECK(j["rebase"].contains("weak_value_scaled"));
  CHECK(j["rebase"].contains("kappa"));
  CHECK(j["rebase"].contains("normalization"));
}

TEST_CASE("parse failures report path, line, and column, and exit 2") {
  const auto bad = testutil::temp_dir() / "cli_bad.qc";
  testutil::write_file(bad, "qubits 2\ngate x 5\n");
  const auto r = run_cli("decompose " + quoted(bad));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find(":2:8:") != std::string::npos);
  CHECK(r.output.find("('5')") != std::string::npos);

  const auto missing = run_cli("decompose /no/such/file.qc");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("cannot read") != std::string::npos);

  const auto broken = testutil::temp_dir() / "cli_broken_umat.qc";
  testutil::write_file(broken, "qubits 1\ngate umat does_not_exist.umat\n");
  const auto rb = run_cli("decompose " + quoted(broken));
  CHECK(rb.exit_code == 2);
  CHECK(rb.output.find("umat") != std::string::npos);
}

TEST_CASE("an unreachable tolerance trips the numerical exit code") {
  // This circuit reconstructs with a genuine (tiny, but nonzero) rounding
  // residual, so an absurd tolerance must be reported as exceeded.
  const auto circuit = corpus_file("08_grover3_m5.qc");
  const auto out = testutil::temp_dir() / "cli_tight.json";
  const auto r = run_cli("decompose " + circuit + " --tol 1e-20" +
                         " --json " + quoted(out));
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("exceeds tolerance") != std::string::npos);
  // The report is still written before the check fails.
  const json j = json::parse(testutil::read_file(out));
  CHECK(j["reconstruction_residual"].get<double>() > 0.0);
}

TEST_CASE("usage problems exit 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("--bogus").exit_code == 1);
  CHECK(run_cli("decompose").exit_code == 1);
  CHECK(run_cli("explode now").exit_code == 1);
  CHECK(run_cli("builtin grover --n 2").exit_code == 1);
  CHECK(run_cli("builtin grover --n 2 --marked 9").exit_code == 1);
  CHECK(run_cli("builtin deutsch --oracle nonsense").exit_code == 1);
  CHECK(run_cli("builtin qpe --count 2 --phase-k 7").exit_code == 1);
  CHECK(run_cli("decompose " + corpus_file("01_bell.qc") +
                " --partition junk")
            .exit_code == 1);
  CHECK(run_cli("decompose " + corpus_file("01_bell.qc") +
                " --partition '(0:0)'")
            .exit_code == 1);
}

TEST_CASE("built-in circuits match their emitted file form") {
  const auto dir = testutil::temp_dir();
  struct Case {
    const char* name;
    std::string builtin_args;
  };
  const Case cases[] = {
      {"deutsch", "builtin deutsch --oracle not_balanced"},
      {"grover", "builtin grover --n 2 --marked 3 --iters 1"},
      {"qpe", "builtin qpe --count 2 --phase-k 1"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto emitted = dir / ("cli_emit_" + std::string(c.name) + ".qc");
    const auto from_file = dir / ("cli_emit_" + std::string(c.name) + ".json");
    const auto in_memory = dir / ("cli_mem_" + std::string(c.name) + ".json");

    REQUIRE(run_cli(c.builtin_args + " --emit " + quoted(emitted)).exit_code ==
            0);
    REQUIRE(run_cli("decompose " + quoted(emitted) + " --json " +
                    quoted(from_file))
                .exit_code == 0);
    REQUIRE(run_cli(c.builtin_args + " --json " + quoted(in_memory))
                .exit_code == 0);

    const json file_j = json::parse(testutil::read_file(from_file));
    const json mem_j = json::parse(testutil::read_file(in_memory));
    check_same_amplitudes(file_j["basis_amplitudes"],
                          mem_j["basis_amplitudes"]);
    CHECK(file_j["reconstruction_residual"].get<double>() <= 1e-10);
  }
}

TEST_CASE("the emitted file is canonical and stable") {
  const auto emitted = testutil::temp_dir() / "cli_deutsch_canon.qc";
  REQUIRE(run_cli("builtin deutsch --oracle identity_balanced --emit " +
                  quoted(emitted))
              .exit_code == 0);
  CHECK(testutil::read_file(emitted) ==
        "circuit deutsch_identity_balanced\n"
        "qubits 2\n"
        "init zero\n"
        "gate x 1\n"
        "gate h 0\n"
        "gate h 1\n"
        "gate oracle identity_balanced\n"
        "gate h 0\n"
        "partition (0:0)(1:1)(3:0)(4:0)\n");
}

TEST_CASE("verify passes every corpus circuit") {
  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::directory_iterator(testutil::corpus_dir())) {
    if (entry.path().extension() == ".qc") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() >= 20);
  for (const auto& path : files) {
    CAPTURE(path.string());
    const auto r = run_cli("verify " + quoted(path));
    CHECK_MESSAGE(r.exit_code == 0, r.output);
    CHECK(r.output.find("FAIL") == std::string::npos);
  }
}

TEST_CASE("the randomized selftest passes") {
  const auto r = run_cli("selftest --cases 40 --seed 7");
  CHECK_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("selftest passed") != std::string::npos);
}

TEST_SUITE_END();
