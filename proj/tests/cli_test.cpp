#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

class Sandbox {
 public:
  Sandbox() {
    dir_ = fs::temp_directory_path() / ("metricspace_cli_" + std::to_string(::getpid()) + "_" + std::to_string(count_++));
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  Run run(const std::string& args, const std::string& env = "") const {
    const std::string out = path("stdout"), err = path("stderr");
    const std::string cmd = env + " '" METRICSPACE_CLI "' " + args + " >'" + out + "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  static inline int count_ = 0;
  fs::path dir_;
};

std::string one_point(const std::string& key, const std::string& values, int n = 2, const std::string& id = "p") {
  return R"({"n": )" + std::to_string(n) + R"(, "points": [{"id": ")" + id + R"(", "weight": 1, ")" + key +
         R"(": )" + values + "}]}";
}

double scalar(const Run& r) { return std::stod(r.out); }

}  // namespace

TEST_CASE("vol, norm and inner print scalars") {
  Sandbox s;
  const std::string g4 = s.write("g4.json", one_point("g", "[4, 0, 4]"));
  const Run vol = s.run("vol " + g4);
  CHECK(vol.code == 0);
  CHECK(vol.out == "4\n");
  const std::string zero = s.write("h0.json", one_point("h", "[0, 0, 0]"));
  const Run norm = s.run("norm " + g4 + " " + zero);
  CHECK(norm.code == 0);
  CHECK(scalar(norm) == 0.0);
  const std::string id = s.write("h1.json", one_point("h", "[1, 0, 1]"));
  const Run inner = s.run("inner " + g4 + " " + id + " " + id);
  CHECK(inner.code == 0);
  // tr((g^-1 I)^2) sqrt(det g) = 2/16 * 4
  CHECK(scalar(inner) == doctest::Approx(0.5));
  CHECK(s.run("vol " + g4 + " --region p").out == "4\n");
}

TEST_CASE("input and validation errors exit 2") {
  Sandbox s;
  const std::string bad = s.write("bad.json", "{\n  \"n\": 2,\n  oops\n}");
  const Run syntax = s.run("vol " + bad);
  CHECK(syntax.code == 2);
  CHECK(syntax.err.find("line 3") != std::string::npos);
  CHECK(s.run("vol " + s.path("missing.json")).code == 2);
  CHECK(s.run("frobnicate").code == 2);
  CHECK(s.run("gen metric-field --n 9").code == 2);
  CHECK(s.run("gen metric-field --spread 0.5").code == 2);
  CHECK(s.run("check no-such-suite").code == 2);
  const std::string g = s.write("g.json", one_point("g", "[1, 0, 1]"));
  CHECK(s.run("vol " + g + " --region nope").code == 2);

  const std::string other = s.write("o.json", one_point("h", "[1, 0, 1]", 2, "q"));
  const Run mismatch = s.run("norm " + g + " " + other);
  CHECK(mismatch.code == 2);
  // Both fingerprints: 16 hex digits each.
  std::size_t hex_runs = 0;
  for (std::size_t i = 0; i + 16 <= mismatch.err.size(); ++i) {
    if (mismatch.err.find_first_not_of("0123456789abcdef", i) >= i + 16) {
      ++hex_runs;
      i += 15;
    }
  }
  CHECK(hex_runs == 2);
}

TEST_CASE("domain errors exit 3 naming the point") {
  Sandbox s;
  const std::string g = s.write(
      "g.json",
      R"({"n": 2, "points": [{"id": "p", "weight": 1, "g": [1, 0, 1]}, {"id": "q", "weight": 1, "g": [1, 2, 1]}]})");
  const Run r = s.run("vol " + g);
  CHECK(r.code == 3);
  CHECK(r.err.find("'q'") != std::string::npos);
}

TEST_CASE("optimizer stall exits 4 and still writes the path") {
  Sandbox s;
  const std::string a = s.write("a.json", one_point("g", "[1, 0, 100]"));
  const std::string b = s.write("b.json", one_point("g", "[100, 0, 1]"));
  const Run r = s.run("dist " + a + " " + b + " --eig-floor 0.9 --out " + s.path("path.json"));
  CHECK(r.code == 4);
  CHECK(fs::exists(s.path("path.json")));
  CHECK(std::isfinite(scalar(r)));
  CHECK(s.run("theta " + a + " " + a + " " + b + " --eig-floor 0.9").code == 4);
}

TEST_CASE("failed checks exit 1 with a working replay line") {
  Sandbox s;
  const Run r = s.run("check exp-invariants --trials 2 --tolerance-scale 0");
  CHECK(r.code == 1);
  const Json report = Json::parse(r.out);
  CHECK(report["pass"] == false);
  REQUIRE(!report["details"]["failures"].empty());
  const std::string replay = report["details"]["failures"][0]["replay"];
  CHECK(r.err.find(replay) != std::string::npos);
  REQUIRE(replay.rfind("metricspace ", 0) == 0);
  const Run again = s.run(replay.substr(std::string("metricspace ").size()));
  CHECK(again.code == 1);
  CHECK(s.run("check exp-invariants --trials 2").code == 0);
}

TEST_CASE("dist and theta examples") {
  Sandbox s;
  CHECK(s.run("gen metric-field --points 3 --seed 5 --out " + s.path("g0.json")).code == 0);
  const std::string g0 = s.path("g0.json");
  const Run same = s.run("dist " + g0 + " " + g0);
  CHECK(same.code == 0);
  CHECK(scalar(same) == 0.0);

  const Run theta0 = s.run("theta " + g0 + " " + g0 + " " + g0);
  CHECK(theta0.code == 0);
  CHECK(Json::parse(theta0.out)["value"] == 0.0);

  const std::string i2 = s.write("i.json", one_point("g", "[1, 0, 1]"));
  const std::string two = s.write("two.json", one_point("g", "[2, 0, 2]"));
  const Run conformal = s.run("theta " + i2 + " " + i2 + " " + two);
  CHECK(conformal.code == 0);
  const double value = Json::parse(conformal.out)["value"];
  CHECK(std::abs(value - std::sqrt(2.0)) <= 0.01 * std::sqrt(2.0));

  CHECK(s.run("gen metric-field --points 3 --seed 6 --out " + s.path("g1.json")).code == 0);
  const std::string g1 = s.path("g1.json");
  const Json all = Json::parse(s.run("theta " + g0 + " " + g0 + " " + g1).out);
  const Json sub = Json::parse(s.run("theta " + g0 + " " + g0 + " " + g1 + " --region p0,p2").out);
  CHECK(sub["value"].get<double>() <= all["value"].get<double>());
  CHECK(sub["details"]["points"].size() == 2);
  CHECK(all["details"]["points"].size() == 3);

  const Run d = s.run("dist " + g0 + " " + g1 + " --json --trace " + s.path("trace.jsonl"));
  CHECK(d.code == 0);
  const Json summary = Json::parse(d.out);
  CHECK(summary["length"].get<double>() > 0.0);
  std::istringstream trace(Sandbox::slurp(s.path("trace.jsonl")));
  double last = INFINITY;
  int lines = 0;
  for (std::string line; std::getline(trace, line); ++lines) {
    const double e = Json::parse(line)["energy"];
    CHECK(e <= last);
    last = e;
  }
  CHECK(lines >= 1);
}

TEST_CASE("gen is deterministic and respects spread") {
  Sandbox s;
  for (const std::string kind : {"metric-field", "density", "path"}) {
    const Run a = s.run("gen " + kind + " --seed 11 --points 5 --n 3");
    const Run b = s.run("gen " + kind + " --seed 11 --points 5 --n 3");
    const Run c = s.run("gen " + kind + " --seed 12 --points 5 --n 3");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
  }
  const Json unit = Json::parse(s.run("gen metric-field --spread 1 --n 3 --points 4").out);
  for (const Json& p : unit["points"]) CHECK(p["g"] == Json::array({1.0, 0.0, 0.0, 1.0, 0.0, 1.0}));
}

TEST_CASE("check suites pass and zero trials pass vacuously") {
  Sandbox s;
  for (const std::string suite : {"lemma-sqrtvol", "theta-bound", "theta-refindep", "pseudometric", "exp-invariants"}) {
    const Run r = s.run("check " + suite);
    CHECK_MESSAGE(r.code == 0, suite);
    CHECK(Json::parse(r.out)["pass"] == true);
    const Run empty = s.run("check " + suite + " --trials 0");
    CHECK(empty.code == 0);
    CHECK(Json::parse(empty.out)["pass"] == true);
  }
}

TEST_CASE("outputs do not depend on the worker count") {
  Sandbox s;
  s.run("gen metric-field --points 6 --n 3 --seed 21 --out " + s.path("a.json"));
  s.run("gen metric-field --points 6 --n 3 --seed 22 --out " + s.path("b.json"));
  const std::string a = s.path("a.json"), b = s.path("b.json");
  for (const std::string args : {"dist " + a + " " + b + " --json", "theta " + a + " " + a + " " + b,
                                 std::string("check pseudometric --trials 5")}) {
    const Run one = s.run(args, "METRICSPACE_THREADS=1");
    const Run many = s.run(args, "METRICSPACE_THREADS=5");
    CHECK(one.code == 0);
    CHECK(one.out == many.out);
  }
}
