#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "minrel/cli.hpp"

namespace fs = std::filesystem;
using minrel::cli::run;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("minrel_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "minrel");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string strip_run_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.find("\"run\":") != std::string::npos || line.rfind("# run:", 0) == 0) continue;
    kept += line + "\n";
  }
  return kept;
}

const char* kClassical = R"({
  "space": {"points": 2, "mu": [1, 1]},
  "prior": [0.5, 0.5],
  "features": [{"name": "u", "values": [0, 1]}],
  "constraint": {"kind": "classical", "targets": [0.7]}
})";

}  // namespace

TEST_CASE("solve reports the classical example") {
  Scratch s;
  const auto r = call({"solve", "--config", s.write("c.json", kClassical)});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["solve"]["beta"][0].get<double>() == doctest::Approx(-0.8473).epsilon(1e-4));
  CHECK(doc["status"] == "ok");
}

TEST_CASE("trivial config returns the prior") {
  Scratch s;
  const auto r = call({"solve", "--config", s.write("t.json", R"({"space": {"points": 3}, "prior": [0.2, 0.3, 0.5]})")});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["solve"]["posterior"]["values"][2].get<double>() == 0.5);
}

TEST_CASE("config errors exit 1 and name the field") {
  Scratch s;
  auto r = call({"solve", "--config", s.write("bad.json", R"({"space": {"points": 2}, "features": [{"values": [0, 1]}],
    "constraint": {"kind": "classical", "targets": [1.5]}})")});
  CHECK(r.code == 1);
  CHECK(r.err.find("constraint.targets[0]") != std::string::npos);
  CHECK(r.err.find("1.5") != std::string::npos);

  r = call({"solve", "--config", s.write("syntax.json", "{\n  \"space\": {\"points\": 2,,}\n}")});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 2") != std::string::npos);

  r = call({"solve", "--config", s.write("mu.json", R"({"space": {"points": 2, "mu": [1, -1]}})")});
  CHECK(r.code == 1);
  CHECK(r.err.find("space.mu[1]") != std::string::npos);

  r = call({"solve", "--config", s.write("unknown.json", R"({"space": {"points": 2}, "prior": "uniform", "extra": 1})")});
  CHECK(r.code == 1);
  CHECK(r.err.find("extra") != std::string::npos);

  r = call({"solve", "--config", (s.dir / "missing.json").string()});
  CHECK(r.code == 1);
  r = call({"solve"});
  CHECK(r.code == 1);
}

TEST_CASE("solver failures exit 2") {
  Scratch s;
  const auto r = call({"solve", "--config", s.write("q.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "q-expectation", "q": 2, "targets": [1.5]}})")});
  CHECK(r.code == 2);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["status"] == "solver-error");
  CHECK(doc.contains("last_beta"));
}

TEST_CASE("verify exit codes") {
  Scratch s;
  // l = p
  auto r = call({"verify", "--config", s.write("lp.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "q-expectation", "q": 2, "targets": [0.49]},
    "test_distribution": [0.3, 0.7]})")});
  CHECK(r.code == 0);
  CHECK(std::abs(nlohmann::json::parse(r.out)["geometry"]["triangle_residual"].get<double>()) < 1e-12);

  r = call({"verify", "--config", s.write("fam.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "q-expectation", "q": 2, "targets": [0.49]},
    "family": {"from": [1, 0], "to": [0, 1]}})")});
  CHECK(r.code == 0);

  r = call({"verify", "--config", s.write("mismatch.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "q-expectation", "q": 2, "targets": [0.49]},
    "test_distribution": [0.6, 0.4]})")});
  CHECK(r.code == 3);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["geometry"]["inequality_sign_consistent"] == true);
  CHECK(doc["geometry"]["cross_term"].get<double>() >= 0.0);

  r = call({"verify", "--config", s.write("random.json", R"({"space": {"points": 3},
    "prior": [0.3, 0.3, 0.4],
    "features": [{"name": "u", "values": [0, 1, 2]}],
    "constraint": {"kind": "normalized-q-expectation", "q": 1.5, "targets": [1.1]},
    "family": {"random": true}})"), "--seed", "4"});
  CHECK(r.code == 0);

  r = call({"verify", "--config", s.write("nol.json", kClassical)});
  CHECK(r.code == 1);
}

TEST_CASE("support violations of the test distribution are flagged") {
  Scratch s;
  const auto r = call({"verify", "--config", s.write("sv.json", R"({"space": {"points": 3},
    "prior": [0.5, 0.5, 0],
    "features": [{"name": "u", "values": [0, 1, 2]}],
    "constraint": {"kind": "q-expectation", "q": 0.5, "targets": [0.8]},
    "test_distribution": [0.2, 0.4, 0.4]})")});
  const auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc["warnings"].size() == 1);
  CHECK(doc["warnings"][0].get<std::string>().find("test_distribution") != std::string::npos);
  CHECK(doc["geometry"]["I_lr"] == "inf");
}

TEST_CASE("sweeps") {
  Scratch s;
  auto r = call({"sweep", "--config", s.write("q.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "q-expectation", "q": 2, "targets": [0.49]},
    "sweep": {"q": [0.5, 0.9, 1.0, 1.5, 2.0]}})")});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header) {
      CHECK(line == "q,status,beta_u,partition,divergence,message");
      header = true;
      continue;
    }
    ++rows;
  }
  CHECK(rows == 5);

  r = call({"sweep", "--config", s.write("empty.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "q-expectation", "q": 2, "targets": [0.49]},
    "sweep": {"q": []}})")});
  CHECK(r.code == 1);

  // target grid with l reproduces the matching argmin
  std::string grid;
  for (int k = 0; k <= 20; ++k) grid += (k ? ", " : "") + std::to_string(0.5 + 0.01 * k);
  r = call({"sweep", "--format", "json", "--config", s.write("grid.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "classical"},
    "test_distribution": [0.4, 0.6],
    "sweep": {"targets": [)" + grid + "]}}")});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["argmin_I_lp_row"] == 10);

  // partial failures are recorded per row
  r = call({"sweep", "--format", "json", "--config", s.write("partial.json", R"({"space": {"points": 2},
    "features": [{"name": "u", "values": [0, 1]}],
    "constraint": {"kind": "classical"},
    "sweep": {"targets": [0.5, 1.5]}})")});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["rows"][1]["status"] == "error");
}

TEST_CASE("reports are deterministic and round-trip exactly") {
  Scratch s;
  const auto cfg = s.write("c.json", R"({"space": {"points": 3, "mu": [0.5, 1, 2]},
    "prior": [0.4, 0.3, 0.25],
    "features": [{"name": "u", "values": [0, 1, 3]}],
    "constraint": {"kind": "normalized-q-expectation", "q": 0.7, "targets": [1.3]},
    "family": {"random": true}})");
  for (const char* format : {"json", "csv"}) {
    const auto a = call({"verify", "--config", cfg, "--format", format, "--seed", "9"});
    const auto b = call({"verify", "--config", cfg, "--format", format, "--seed", "9"});
    CHECK(a.code == b.code);
    CHECK(strip_run_line(a.out) == strip_run_line(b.out));
  }
  const auto out_path = (s.dir / "report.json").string();
  REQUIRE(call({"solve", "--config", cfg, "--output", out_path}).code == 0);
  std::ifstream in(out_path);
  const auto doc = nlohmann::json::parse(in);
  // 17 significant digits restore the exact doubles
  const double divergence = doc["solve"]["divergence"].get<double>();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", divergence);
  CHECK(std::strtod(buf, nullptr) == divergence);
  CHECK(doc["solve"]["closed_form_minimum"].get<double>() == doctest::Approx(divergence).epsilon(1e-9));
}
