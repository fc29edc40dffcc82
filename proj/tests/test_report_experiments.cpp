#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "layerheat/error.hpp"
#include "layerheat/experiments.hpp"
#include "layerheat/report.hpp"

using namespace layerheat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lh_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("number formatting") {
  using report::num;
  CHECK(num(0.1) == "0.1");
  CHECK(num(-2.0) == "-2");
  CHECK(num(1e-20) == "1e-20");
  CHECK(num(1.0 / 3.0) == "0.333333333333333");
  CHECK(num(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(num(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(num(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(num(42LL) == "42");
}

TEST_CASE("csv and svg output") {
  report::Table t;
  t.header = {"a", "b"};
  t.add({"1", "x,y"});
  t.add({"say \"hi\"", "2"});
  CHECK(report::to_csv(t) == "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",2\n");
  CHECK_THROWS_AS(t.add({"only one"}), Error);

  report::Plot p{"title <&>", "t", "y", true, {{"s", {0.0, 1.0, 2.0}, {1.0, 10.0, 0.0}}}};
  const auto svg = report::to_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("title &lt;&amp;&gt;") != std::string::npos);
  CHECK(svg == report::to_svg(p));

  try {
    report::write_csv("/nonexistent/dir/out.csv", t);
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

TEST_CASE("experiment configuration") {
  experiments::ExperimentConfig c;
  c.set("n", "128");
  c.set("t-final", " 2.5 ");
  c.set("seed", "99");
  CHECK(c.N == 128);
  CHECK(c.T == 2.5);
  CHECK(c.seed == 99u);
  try {
    c.set("resolution", "3");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("'resolution'") != std::string::npos);
  }
  CHECK_THROWS_AS(c.set("alpha", "half"), Error);

  const auto dir = scratch("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# comment\nn = 32   # trailing\n\nalpha=0.25\n";
  }
  c.load_file((dir / "run.cfg").string());
  CHECK(c.N == 32);
  CHECK(c.alpha == 0.25);
  c.validate();
  c.N = 30 + 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c.N = 32;
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  fs::remove_all(dir);
}

TEST_CASE("experiment runs and exit codes") {
  const auto dir = scratch("runs");
  std::ostringstream log;
  CHECK(experiments::run("kernel-check", {{"out", dir.string()}}, "", log) == experiments::exit_ok);
  const auto csv = slurp(dir / "kernel-check.csv");
  CHECK(csv.rfind("t,mass,abs_error\n", 0) == 0);
  CHECK(count_lines(csv) == 4);
  CHECK(log.str().rfind("PASS kernel-check", 0) == 0);

  std::ostringstream l2;
  CHECK(experiments::run("no-such-thing", {}, "", l2) == experiments::exit_config);

  {
    std::ofstream f(dir / "bad.shape");
    f << "radius=1\ncos_x_1=1\nsin_y_1=1\nwobble_3=0.2\n";
  }
  std::ostringstream l3;
  CHECK(experiments::run("jump-test", {{"shape", (dir / "bad.shape").string()}, {"out", dir.string()}}, "", l3) ==
        experiments::exit_config);
  CHECK(count_lines(l3.str()) == 1);
  CHECK(l3.str().find("wobble_3") != std::string::npos);

  std::ostringstream l4;
  CHECK(experiments::run("jump-test", {{"out", dir.string()}}, "", l4) == experiments::exit_ok);
  const auto jt = slurp(dir / "jump-test.csv");
  CHECK(jt.rfind("theta,t,quantity,side,measured_jump,expected,rel_error,converged\n", 0) == 0);
  CHECK(count_lines(jt) == 1 + 4 * 4 * 4);

  std::ostringstream l5;
  CHECK(experiments::run("kernel-check", {{"n", "9"}}, "", l5) == experiments::exit_config);
  CHECK(l5.str().find("'n'") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("identical settings give identical bytes") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  for (const auto& d : {a, b})
    REQUIRE(experiments::run("norms", {{"out", d.string()}, {"seed", "17"}, {"n", "32"}, {"m", "16"}}, "", log) ==
            experiments::exit_ok);
  CHECK(slurp(a / "norms.csv") == slurp(b / "norms.csv"));
  CHECK(slurp(a / "norms.svg") == slurp(b / "norms.svg"));
  CHECK(!slurp(a / "norms.csv").empty());
  fs::remove_all(a);
  fs::remove_all(b);
}
