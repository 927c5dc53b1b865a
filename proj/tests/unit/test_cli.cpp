#include "chipfire/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "chipfire/family.hpp"
#include "doctest.h"

using namespace chipfire;

namespace {

struct RunResult {
  int rc;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::istringstream in;
  std::ostringstream out, err;
  int rc = cli::run(args, in, out, err);
  return {rc, out.str(), err.str()};
}

std::string dpath(const std::string& f) { return testutil::data_dir() + "/" + f; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("info: exact invariant table") {
  RunResult r = run_cli({"info", dpath("ex1.graph")});
  CHECK(r.rc == 0);
  CHECK(r.err.empty());
  CHECK(r.out ==
        "graph: 3 vertices, 2 edges, base a\n"
        "x m(x) i(x) K(x)\n"
        "a 1/2 1/2 -1/2\n"
        "b 5/6 1/6 1/2\n"
        "c 1/3 1/3 -1/3\n"
        "i_gcd = 1/6\n"
        "euler = 1/6\n"
        "deg K = -1/3\n"
        "m(V) = 5/3\n"
        "m_common = 6\n");

  RunResult again = run_cli({"info", dpath("ex1.graph")});
  CHECK(again.out == r.out);  // byte-identical across runs

  RunResult dec = run_cli({"info", dpath("ex1.graph"), "--decimal", "2"});
  CHECK(dec.rc == 0);
  CHECK(dec.out.find("b 5/6(~0.83) 1/6(~0.17) 1/2(~0.50)") != std::string::npos);
}

TEST_CASE("reduce: trace, decimals, scrambled schedule") {
  const std::string expected =
      "reduced divisor:\n"
      "a 0\n"
      "b 1/6\n"
      "c 0\n"
      "firing function:\n"
      "a 0\n"
      "b 0\n"
      "c 1\n"
      "phase1_rounds = 1\n"
      "phase2_fires = 2\n";
  RunResult r = run_cli({"reduce", dpath("ex1.graph"), dpath("d_reduce.divisor")});
  CHECK(r.rc == 0);
  CHECK(r.out == expected);

  RunResult dec =
      run_cli({"reduce", dpath("ex1.graph"), dpath("d_reduce.divisor"), "--decimal", "3"});
  CHECK(dec.out.find("b 1/6(~0.167)\n") != std::string::npos);
  CHECK(dec.out.find("a 0(~0.000)\n") != std::string::npos);

  for (const char* seed : {"3", "17"}) {
    RunResult rr = run_cli({"reduce", dpath("ex1.graph"), dpath("d_reduce.divisor"),
                            "--randomized", "--seed", seed});
    CHECK(rr.rc == 0);
    CHECK(rr.out.substr(0, 31) == "reduced divisor:\na 0\nb 1/6\nc 0\n");
  }
}

TEST_CASE("winnable, rank, orders-rank") {
  RunResult w = run_cli({"winnable", dpath("ex1.graph"), dpath("d.divisor")});
  CHECK(w.rc == 0);
  CHECK(w.out == "mode: reduced\nWINNABLE\n");
  RunResult wb =
      run_cli({"winnable", dpath("ex1.graph"), dpath("d.divisor"), "--mode", "brute"});
  CHECK(wb.out == "mode: brute\nWINNABLE\n");

  RunResult rk = run_cli({"rank", dpath("ex1.graph"), dpath("d.divisor")});
  CHECK(rk.rc == 0);
  CHECK(rk.out ==
        "rank = 1/6\n"
        "k = 1\n"
        "tested = 3\n"
        "nodes = 12\n"
        "obstruction:\n"
        "a 0\n"
        "b 1/3\n"
        "c 0\n");

  RunResult greedy =
      run_cli({"rank", dpath("ex1.graph"), dpath("d.divisor"), "--greedy"});
  CHECK(greedy.rc == 0);
  CHECK(greedy.out.find("greedy = 0\n") != std::string::npos);
  CHECK(greedy.out.find("greedy disagrees with rank") != std::string::npos);

  RunResult od = run_cli({"orders-rank", dpath("ex1.graph"), dpath("d.divisor")});
  CHECK(od.rc == 0);
  CHECK(od.out == "orders rank = 1/6\nrank() = 1/6\nAGREE\n");
}

TEST_CASE("rr-check and threshold-A") {
  RunResult rr = run_cli({"rr-check", dpath("ex1.graph"), dpath("d.divisor")});
  CHECK(rr.rc == 0);
  CHECK(rr.out ==
        "r(D) = 1/6\n"
        "r(K-D) = -1/6\n"
        "lhs = 1/3\n"
        "rhs = 1/3\n"
        "HOLDS\n");

  RunResult th = run_cli({"threshold-A"});
  CHECK(th.rc == 0);
  CHECK(th.out ==
        "A = 0.056905\n"
        "argmax a = 1.388120\n"
        "B(log 2) = 0 (exact)\n");
}

TEST_CASE("spectral: plain table and the seeded probes") {
  RunResult s = run_cli({"spectral", dpath("ex1.graph")});
  CHECK(s.rc == 0);
  const std::string head = "eigenvalues: 0 1 2\ngap = 1\nsweeps = 1\nrayleigh residual = ";
  REQUIRE(s.out.substr(0, head.size()) == head);
  CHECK(std::stod(s.out.substr(head.size())) <= 1e-9);

  RunResult pcross =
      run_cli({"spectral", dpath("ex1.graph"), "--probe", "crossing", "--seed", "7",
               "--count", "2"});
  CHECK(pcross.rc == 0);
  CHECK(pcross.out ==
        "probe 1: U={b,c} cross 1/5 <= 33/10 HOLDS\n"
        "probe 2: U={a,b} cross 54/5 <= 99/5 HOLDS\n"
        "all probes hold\n");

  RunResult pball =
      run_cli({"spectral", dpath("ex1.graph"), "--probe", "escape", "--seed", "7",
               "--count", "2", "--eps", "1/2"});
  CHECK(pball.rc == 0);
  CHECK(pball.out ==
        "probe 1: U={a,b} cross 27/10 <= 81/8 HOLDS | ball radius 1 rho=2/5 "
        "escape 3 <= 3 HOLDS\n"
        "probe 2: U={a} cross 0 <= 489/40 HOLDS | ball radius 0 rho=1 escape "
        "9/2 <= 65/6 HOLDS\n"
        "all probes hold\n");

  RunResult ext = run_cli({"spectral", "--probe", "extension", "--preset",
                           "ray-double-exp", "--n", "1", "--to", "6"});
  CHECK(ext.rc == 0);
  CHECK(ext.out ==
        "lambda_1 = 2\n"
        "rho_1 = 1/3\n"
        "lhs = 2.25\n"
        "rhs = 2.5\n"
        "slack = 0.25\n"
        "HOLDS\n");
  CHECK(run_cli({"spectral", "--probe", "extension"}).rc == 2);
}

TEST_CASE("family series and convergence tables") {
  RunResult s = run_cli({"family", "ray-double-exp", "series", "--to", "3"});
  CHECK(s.rc == 0);
  CHECK(s.out ==
        "n rho_n lambda_n e_n ratio43 r_n\n"
        "1 1/3 - 1/2 1/2 -\n"
        "2 1/5 - 1/4 1/5 -\n"
        "3 1/17 - 1/16 1/17 -\n"
        "A = 0.056905\n"
        "first n with rho_n < A: none\n"
        "ratio43 strictly decreasing: yes\n");

  RunResult c = run_cli({"family", "ray-double-exp", "converge", "--divisor",
                         dpath("ray_support.divisor"), "--support-radius", "2",
                         "--to", "3"});
  CHECK(c.rc == 0);
  CHECK(c.out ==
        "n r_n r(K-D_n) e_n deg rr\n"
        "2 1/2 -1/4 1/4 1/2 holds\n"
        "3 1/2 -1/16 1/16 1/2 holds\n"
        "stable suffix = 2 (K = 2)\n"
        "verdict: stabilized\n");

  RunResult rep = run_cli({"family", "ray-double-exp", "rr-report", "--divisor",
                           dpath("ray_support.divisor"), "--support-radius", "2",
                           "--to", "3"});
  CHECK(rep.rc == 0);
  CHECK(rep.out ==
        "n r_n r(K-D_n) rr\n"
        "2 1/2 -1/4 holds\n"
        "3 1/2 -1/16 holds\n"
        "r^(D) = 1/2\n"
        "r^(K-D) = -1/16\n"
        "e^ = 1/16\n"
        "deg = 1/2\n"
        "residual = 0\n"
        "verdict: stabilized\n"
        "ratio43 vanishing over window: yes\n"
        "note: finite window only: each r_n is exact on its ball, but radii "
        "beyond 3 were not examined and no limit is claimed\n");

  // truncation surfaces as exit code 3 plus a diagnostic
  RunResult t = run_cli({"family", "ray-double-exp", "converge", "--divisor",
                         dpath("ray_support.divisor"), "--support-radius", "2",
                         "--to", "4", "--budget", "50"});
  CHECK(t.rc == 3);
  CHECK(t.out.find("2 1/2 -1/4 1/4 1/2 holds\n") != std::string::npos);
  CHECK(t.out.find("verdict: inconclusive\n") != std::string::npos);
  CHECK((t.out + t.err).find("enumeration budget exhausted at radius 3") !=
        std::string::npos);
}

TEST_CASE("csv export: schema, blanks, decimals, round-trip") {
  namespace fs = std::filesystem;
  const std::string conv = (fs::temp_directory_path() / "chipfire_conv_test.csv").string();
  const std::string ser = (fs::temp_directory_path() / "chipfire_ser_test.csv").string();

  RunResult c = run_cli({"family", "ray-double-exp", "converge", "--divisor",
                         dpath("ray_support.divisor"), "--support-radius", "2",
                         "--to", "3", "--gaps", "--csv", conv});
  REQUIRE(c.rc == 0);
  std::string text = slurp(conv);
  std::vector<std::string> lines = split(text, '\n');
  REQUIRE(lines.size() == 5);  // header, three rows, trailing newline
  CHECK(lines[0] == "n,rho_n,lambda_n,e_n,ratio43,r_n");
  CHECK(lines[4].empty());

  Family ray = Family::ray_double_exp();
  for (int n = 1; n <= 3; ++n) {
    std::vector<std::string> cells = split(lines[n], ',');
    REQUIRE(cells.size() == 6);
    CHECK(cells[0] == std::to_string(n));
    // rationals re-parse to the exact library values
    CHECK(Rational::parse(cells[1]) == shell_rho(build_ball(ray, n)));
    CHECK(Rational::parse(cells[3]) == build_ball(ray, n).graph.euler());
    CHECK(Rational::parse(cells[4]) ==
          exhaustion_series(ray, n).rows[n - 1].ratio43);
    double lambda = std::stod(cells[2]);
    CHECK(lambda == doctest::Approx(spectral_gap(build_ball(ray, n).graph).gap)
                        .epsilon(1e-9));
  }
  CHECK(split(lines[1], ',')[5].empty());  // r_1 not computed: blank cell
  CHECK(Rational::parse(split(lines[2], ',')[5]) == Rational(1, 2));
  CHECK(Rational::parse(split(lines[3], ',')[5]) == Rational(1, 2));

  RunResult s = run_cli({"family", "ray-double-exp", "series", "--to", "2", "--csv",
                         ser, "--decimal", "4"});
  REQUIRE(s.rc == 0);
  CHECK(slurp(ser) ==
        "n,rho_n,lambda_n,e_n,ratio43,r_n,rho_n_dec,e_n_dec,ratio43_dec,r_n_dec\n"
        "1,1/3,,1/2,1/2,,0.3333,0.5000,0.5000,\n"
        "2,1/5,,1/4,1/5,,0.2000,0.2500,0.2000,\n");

  // repeat runs are byte-identical
  RunResult c2 = run_cli({"family", "ray-double-exp", "converge", "--divisor",
                          dpath("ray_support.divisor"), "--support-radius", "2",
                          "--to", "3", "--gaps", "--csv", conv});
  CHECK(c2.rc == 0);
  CHECK(slurp(conv) == text);

  fs::remove(conv);
  fs::remove(ser);
}

TEST_CASE("exit codes and diagnostics") {
  RunResult usage = run_cli({});
  CHECK(usage.rc == 1);
  CHECK(usage.err.find("usage error") != std::string::npos);
  CHECK(run_cli({"bogus"}).rc == 1);
  CHECK(run_cli({"info", dpath("ex1.graph"), "--bogus"}).rc == 1);
  CHECK(run_cli({"family", "ray-double-exp", "series"}).rc == 1);  // --to required

  RunResult help = run_cli({"--help"});
  CHECK(help.rc == 0);
  CHECK(help.out.find("Usage: chipfire") != std::string::npos);
  RunResult subhelp = run_cli({"family", "--help"});
  CHECK(subhelp.rc == 0);
  CHECK(subhelp.out.find("preset") != std::string::npos);

  RunResult missing = run_cli({"info", dpath("no_such_file.graph")});
  CHECK(missing.rc == 2);
  CHECK(missing.err.find("cannot open") != std::string::npos);

  RunResult badw = run_cli({"reduce", dpath("bad_weight.graph"), dpath("d.divisor")});
  CHECK(badw.rc == 2);
  CHECK(badw.err.find("nonpositive weight") != std::string::npos);

  RunResult loop = run_cli({"info", dpath("loop.graph")});
  CHECK(loop.rc == 4);
  CHECK(loop.err.find("loop at vertex") != std::string::npos);

  RunResult budget =
      run_cli({"rank", dpath("ex1.graph"), dpath("d.divisor"), "--budget", "2"});
  CHECK(budget.rc == 3);
  CHECK(budget.out.find("rank = 0\n") != std::string::npos);
  CHECK(budget.err.find("budget") != std::string::npos);

  CHECK(run_cli({"family", "bogus", "series", "--to", "2"}).rc == 2);
  RunResult noratio = run_cli({"family", "ray-geometric", "series", "--to", "2"});
  CHECK(noratio.rc == 2);
  CHECK(noratio.err.find("needs --param ratio") != std::string::npos);
  RunResult badparam =
      run_cli({"family", "ray-geometric", "--param", "ratio", "series", "--to", "2"});
  CHECK(badparam.rc == 2);
  CHECK(badparam.err.find("key=value") != std::string::npos);

  RunResult deep = run_cli({"family", "ray-double-exp", "series", "--to", "30"});
  CHECK(deep.rc == 4);  // double-exp depth cap is structural
}

TEST_CASE("parametrized presets through the command line") {
  RunResult geo = run_cli({"family", "ray-geometric", "--param", "ratio=1/2", "series",
                           "--to", "3"});
  CHECK(geo.rc == 0);
  CHECK(geo.out.find("1 1/3 - 1 1/2 -\n") != std::string::npos);
  CHECK(geo.out.find("ratio43 strictly decreasing: no\n") != std::string::npos);

  RunResult lp = run_cli({"family", "lollipop", "--param",
                          "core=" + dpath("lollipop_core.graph"), "--param",
                          "scale=1/2", "series", "--to", "2"});
  CHECK(lp.rc == 0);
  CHECK(lp.out.find("ratio43 strictly decreasing: yes\n") != std::string::npos);

  RunResult extgeo = run_cli({"spectral", "--probe", "extension", "--preset",
                              "ray-geometric", "--param", "ratio=1/2", "--n", "1",
                              "--to", "4"});
  CHECK(extgeo.rc == 0);
  CHECK(extgeo.out.find("HOLDS\n") != std::string::npos);
}
