#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gapflow/cli.hpp"
#include "gapflow/config.hpp"

using namespace gapflow;

namespace {

const std::string kConfigs = std::string(GAPFLOW_SOURCE_DIR) + "/configs/";

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++n;
  }
  return n;
}

std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = "/tmp/gapflow_test_" + name + ".json";
  std::ofstream(path) << text;
  return path;
}

const char* kGoldenText = R"({
  "field": {"minpoly": ["-1", "1", "1"], "omega": [{"def": ["0", "1"], "approx": "0.618"}]},
  "units": [["0", "1"]],
  "region": {"kind": "box", "lo": ["0"], "hi": ["1"]},
  "schedule": "1:20"
})";

}  // namespace

TEST_CASE("config round trip") {
  for (const char* name : {"cubic7_box.json", "cubic7_simplex.json", "golden.json", "cbrt2.json"}) {
    auto c = load_config(kConfigs + name);
    auto j = to_json(c);
    auto c2 = parse_config(j);
    CHECK(c2 == c);
    CHECK(to_json(c2) == j);
    CHECK(parse_config_text(j.dump()) == c);
  }
  auto c = load_config(kConfigs + "cubic7_box.json");
  CHECK(c.units.size() == 2);
  CHECK(c.tol_imag == Rational(1, 100000000));
  CHECK(c.volume.method == VolumeMethod::exact_box);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(parse_config_text(kGoldenText));
  std::string floats = kGoldenText;
  floats.replace(floats.find("[\"-1\", \"1\", \"1\"]"), 16, "[-1, 1, 1]");
  CHECK_THROWS_AS(parse_config_text(floats), ConfigError);
  std::string unknown = kGoldenText;
  unknown.insert(unknown.find("\"units\""), "\"colour\": \"red\", ");
  CHECK_THROWS_AS(parse_config_text(unknown), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
  std::string bits = kGoldenText;
  bits.insert(bits.find("\"units\""), "\"precision_bits\": 20, ");
  CHECK_THROWS_AS(parse_config_text(bits), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  // A rational hint string parses exactly.
  CHECK(parse_config_text(kGoldenText).field.omega_approx[0] == Rational(309, 500));
}

TEST_CASE("schedules") {
  auto ts = [](const std::string& s) {
    std::vector<long> out;
    for (const auto& t : Schedule::parse(s).expand()) out.push_back(t.get_num().get_si());
    return out;
  };
  CHECK(ts("log:1:6") == std::vector<long>{3, 10, 31, 100, 316, 1000});
  CHECK(ts("log:4:12:4") == std::vector<long>{10, 17, 31, 56, 100, 177, 316, 562, 1000});
  CHECK(ts("1:5:2") == std::vector<long>{1, 3, 5});
  CHECK(ts("20,50,100") == std::vector<long>{20, 50, 100});
  CHECK(Schedule::parse("3/2,2").expand()[0] == Rational(3, 2));
  CHECK_THROWS_AS(Schedule::parse("0,5"), ConfigError);
  CHECK_THROWS_AS(Schedule::parse("5:1"), ConfigError);
  CHECK_THROWS_AS(Schedule::parse("x"), ConfigError);
}

TEST_CASE("cli: spectrum dumps") {
  const std::string cfg = kConfigs + "cubic7_box.json";
  auto r50 = run({"spectrum", "--config", cfg, "--t", "50"});
  CHECK(r50.code == 0);
  CHECK(data_rows(r50.out) == 2500);
  auto r1 = run({"spectrum", "--config", cfg, "--t", "1"});
  CHECK(r1.code == 0);
  CHECK(data_rows(r1.out) == 1);
  auto g = run({"spectrum", "--config", kConfigs + "golden.json", "--t", "100", "--format", "json"});
  CHECK(g.code == 0);
  auto j = nlohmann::json::parse(g.out);
  CHECK(j["distinct"].get<int>() <= 3);
  CHECK(j["rows"].size() == 100);
}

TEST_CASE("cli: worked example reports") {
  const std::string cfg = kConfigs + "cubic7_box.json";
  auto t6 = run({"table6", "--config", cfg});
  CHECK(t6.code == 0);
  CHECK(t6.err.empty());
  CHECK(t6.out.find("4,100,\"(186,-308,81)\",\"(186.00012, -308.00008, 81.00001)\"") != std::string::npos);
  CHECK(t6.out.find("2,10,\"(-3,4,0)\",\"(-3.02177, 4.01463, -0.00234)\"") != std::string::npos);
  CHECK(t6.out.find("1,3,\"(-5,8,-2)\",\"(-4.80194, 7.86690, -1.97869)\"") != std::string::npos);

  auto rates = run({"rates", "--config", cfg});
  CHECK(rates.code == 0);
  CHECK(rates.out.find("# beta: (1.96080, -0.70061)") != std::string::npos);

  auto flow = run({"flow", "--config", cfg, "--format", "json"});
  CHECK(flow.code == 0);
  auto j = nlohmann::json::parse(flow.out);
  CHECK(j["k"] == 2);
  CHECK(j["rows"][1]["im"] == "6.16003");
  CHECK(j["rows"][2]["im"] == "-2.20103");
  CHECK(j["rows"][0]["re"] == "-3.00000");

  auto full = run({"rates", "--config", cfg, "--full-precision"});
  CHECK(full.out.find("1.96079940170255") != std::string::npos);
  CHECK(full.out.find("1.96080,") == std::string::npos);
}

TEST_CASE("cli: outputs are byte-identical across runs") {
  const std::string cfg = kConfigs + "cubic7_simplex.json";
  std::vector<std::string> args = {"volumes", "--config", cfg, "--t", "50", "--samples", "65536"};
  auto a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  auto s1 = run({"sweep", "--config", kConfigs + "cubic7_box.json", "--t-grid", "10,20"});
  auto s2 = run({"sweep", "--config", kConfigs + "cubic7_box.json", "--t-grid", "10,20"});
  CHECK(s1.code == 0);
  CHECK(s1.out == s2.out);
}

TEST_CASE("cli: every command runs on the cubic example") {
  const std::string cfg = kConfigs + "cubic7_box.json";
  for (const char* cmd : {"labels", "proportions", "ratios", "words", "volumes", "sweep"}) {
    auto r = run({cmd, "--config", cfg, "--t", "40", "--t-grid", "10,17,31"});
    CHECK_MESSAGE(r.code == 0, cmd << ": " << r.err);
    CHECK(data_rows(r.out) > 0);
  }
  auto part = run({"proportions", "--config", cfg, "--t", "30", "--partition"});
  CHECK(part.code == 0);
  CHECK(data_rows(part.out) == 900);
  auto tg = run({"threegap", "--random", "10", "--t", "200"});
  CHECK(tg.code == 0);
  CHECK(tg.out.find("# violations: 0") != std::string::npos);
  auto gf = run({"flow", "--config", kConfigs + "golden.json"});
  CHECK(gf.code == 0);
  CHECK(gf.out.find("# k: 1") != std::string::npos);
}

TEST_CASE("cli: output file and exit codes") {
  const std::string cfg = kConfigs + "cubic7_box.json";
  const std::string out = "/tmp/gapflow_test_spectrum.csv";
  std::remove(out.c_str());
  auto r = run({"spectrum", "--config", cfg, "--t", "3", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(data_rows(ss.str()) == 9);

  CHECK(run({"spectrum"}).code == kExitConfig);
  CHECK(run({"spectrum", "--config", "/nonexistent.json"}).code == kExitConfig);
  CHECK(run({"nonsense"}).code == kExitConfig);
  CHECK(run({"spectrum", "--config", cfg, "--t", "abc"}).code == kExitConfig);
  CHECK(run({"spectrum", "--config", cfg, "--t", "1/2"}).code == kExitConfig);
  CHECK(run({"rates", "--config", cfg, "--precision-bits", "10"}).code == kExitConfig);

  std::string identity = kGoldenText;
  identity.replace(identity.find("[[\"0\", \"1\"]]"), 12, "[[\"1\", \"0\"]]");
  CHECK(run({"rates", "--config", write_temp("identity", identity)}).code == kExitConfig);
  std::string nounits = kGoldenText;
  nounits.replace(nounits.find("\"units\": [[\"0\", \"1\"]],"), 23, "");
  CHECK(run({"rates", "--config", write_temp("nounits", nounits)}).code == kExitConfig);
  CHECK(run({"spectrum", "--config", write_temp("nounits", nounits), "--t", "5"}).code == 0);
  CHECK(run({"threegap", "--config", cfg}).code == kExitConfig);
  CHECK(run({"labels", "--config", kConfigs + "cbrt2.json", "--theoretical"}).code == kExitConfig);
  auto t1 = run({"rates", "--config", cfg, "--t", "1"});
  CHECK(t1.code == 0);
  CHECK(t1.err.empty());
}
