#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "shapecert/io.hpp"

using namespace shapecert;

namespace {

const std::string kCli = SHAPECERT_CLI_PATH;
const std::string kDir = SHAPECERT_TEST_DIR;

int run(const std::string& args, std::string* out = nullptr) {
  const std::string path = kDir + "/cli_out.txt";
  const std::string cmd = kCli + " " + args + " > " + path + " 2>&1";
  int rc = std::system(cmd.c_str());
  if (out) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(rc);
}

std::string file_text(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

// {"nvars":1, h: x^2+1}  (empty over the reals)
void write_circle_problem(const std::string& path) {
  io::ProblemFile pf;
  pf.nvars = 1;
  pf.var_names = {"x"};
  Polynomial h = Polynomial::variable(1, 0) * Polynomial::variable(1, 0) +
                 Polynomial::constant(1, 1);
  pf.h = {h};
  io::write_problem(pf, path);
}

}  // namespace

TEST_CASE("io: problem file round trip is identity") {
  io::ProblemFile pf;
  pf.nvars = 2;
  pf.var_names = {"x", "y"};
  auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  pf.f = {x + y.scaled(Rational(3, 7))};
  pf.g = {x * y - Polynomial::constant(2, 2)};
  pf.h = {x * x * y};
  const std::string path = kDir + "/roundtrip_problem.json";
  io::write_problem(pf, path);
  io::ProblemFile back = io::read_problem(path);
  CHECK(back.nvars == pf.nvars);
  CHECK(back.var_names == pf.var_names);
  REQUIRE(back.f.size() == 1);
  CHECK(back.f[0] == pf.f[0]);
  CHECK(back.g[0] == pf.g[0]);
  CHECK(back.h[0] == pf.h[0]);
}

TEST_CASE("io: malformed problems raise ParseError") {
  const std::string path = kDir + "/broken.json";
  write_text(path, "{ not json");
  CHECK_THROWS_AS(io::read_problem(path), io::ParseError);
  write_text(path, R"({"nvars": 2, "f": [{"terms": [{"exps": [1], "num": 1, "den": 1}]}]})");
  CHECK_THROWS_AS(io::read_problem(path), io::ParseError);  // exps length mismatch
  write_text(path, R"({"nvars": 1, "f": [{"terms": [{"exps": [1], "num": 1, "den": 0}]}]})");
  CHECK_THROWS_AS(io::read_problem(path), io::ParseError);  // zero denominator
}

TEST_CASE("io: polynomial text parser") {
  Polynomial p = io::parse_polynomial("x^2*y + 3/2*x - 1", {"x", "y"});
  auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  CHECK(p == x * x * y + x.scaled(Rational(3, 2)) - Polynomial::constant(2, 1));
  CHECK_THROWS_AS(io::parse_polynomial("q + 1", {"x"}), io::ParseError);
  CHECK_THROWS_AS(io::parse_polynomial("1/0", {"x"}), io::ParseError);
}

TEST_CASE("cli: sos-check exit codes") {
  CHECK(run("sos-check --expr \"x^2+2*x*y+y^2\" --vars x,y") == 0);
  // Motzkin polynomial: not SOS
  CHECK(run("sos-check --expr \"x^4*y^2+x^2*y^4-3*x^2*y^2+1\" --vars x,y") == 2);
  // malformed input file
  const std::string bad = kDir + "/cli_bad.json";
  write_text(bad, "{broken");
  CHECK(run("sos-check " + bad) == 64);
}

TEST_CASE("cli: certify + verify round trip") {
  const std::string problem = kDir + "/cli_circle.json";
  const std::string cert = kDir + "/cli_circle_cert.json";
  write_circle_problem(problem);
  std::string out;
  CHECK(run("certify " + problem + " --max-degree 2 --out " + cert, &out) == 0);
  CHECK(run("verify " + problem + " " + cert, &out) == 0);
  CHECK(out.find("PASS") != std::string::npos);

  // nonempty set: {x >= 0}
  io::ProblemFile pf;
  pf.nvars = 1;
  pf.var_names = {"x"};
  pf.f = {Polynomial::variable(1, 0)};
  const std::string nonempty = kDir + "/cli_nonempty.json";
  io::write_problem(pf, nonempty);
  CHECK(run("certify " + nonempty + " --max-degree 2") == 2);
}

TEST_CASE("cli: certificates are byte-identical across runs") {
  const std::string problem = kDir + "/cli_det.json";
  const std::string c1 = kDir + "/cli_det1.json";
  const std::string c2 = kDir + "/cli_det2.json";
  write_circle_problem(problem);
  REQUIRE(run("certify " + problem + " --max-degree 2 --out " + c1) == 0);
  REQUIRE(run("certify " + problem + " --max-degree 2 --out " + c2) == 0);
  CHECK(file_text(c1) == file_text(c2));
  CHECK(!file_text(c1).empty());
}

TEST_CASE("cli: corrupted certificate fails verify") {
  const std::string problem = kDir + "/cli_corrupt.json";
  const std::string cert = kDir + "/cli_corrupt_cert.json";
  write_circle_problem(problem);
  REQUIRE(run("certify " + problem + " --max-degree 2 --out " + cert) == 0);
  io::Json j;
  {
    std::ifstream is(cert);
    is >> j;
  }
  // corrupt the first ideal multiplier coefficient
  REQUIRE(!j["ideal_multipliers"].empty());
  REQUIRE(!j["ideal_multipliers"][0]["terms"].empty());
  j["ideal_multipliers"][0]["terms"][0]["coeff"] = "7/3";
  write_text(cert, j.dump(2));
  CHECK(run("verify " + problem + " " + cert) == 2);
}

TEST_CASE("cli: formation build-set writes the spec'd counts") {
  const std::string out = kDir + "/cli_set.json";
  std::string text;
  CHECK(run("formation build-set --agents 4 --dbar-sq 1,2,1,1,2,1 --mode reduced --out " + out,
            &text) == 0);
  CHECK(text.find("5 variables") != std::string::npos);
  CHECK(text.find("8 equations") != std::string::npos);
  CHECK(text.find("1 inequation") != std::string::npos);
  CHECK(text.find("5 inequalities") != std::string::npos);
  io::ProblemFile pf = io::read_problem(out);
  CHECK(pf.nvars == 5);
  CHECK(pf.h.size() == 8);
  CHECK(pf.g.size() == 1);
  CHECK(pf.f.size() == 5);

  // full-minor refusal without --force
  CHECK(run("formation build-set --agents 4 --dbar-sq 1,2,1,1,2,1 --mode full --no-gauge --out " +
            out) == 64);
  // invalid spec
  CHECK(run("formation build-set --agents 4 --dbar-sq 1,2 --out " + out) == 64);
}

TEST_CASE("cli: formation simulate and classify") {
  const std::string traj = kDir + "/cli_traj.csv";
  const std::string rep = kDir + "/cli_rep.json";
  std::string out;
  // start at the desired square: single-sample trajectory
  CHECK(run("formation simulate --agents 4 --dbar-sq 1,2,1,1,2,1 "
            "--init 0,0,1,0,1,1,0,1 --out " +
                traj + " --report " + rep,
            &out) == 0);
  CHECK(out.find("classification: correct") != std::string::npos);
  std::string csv = file_text(traj);
  CHECK(csv.rfind("time,p1x,p1y,", 0) == 0);  // mandatory header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one sample

  // classify the collinear triangle equilibrium found by simulation
  CHECK(run("formation simulate --agents 3 --dbar-sq 1,1,1 --init 0,0,0.7,0,1.9,0 "
            "--max-time 2000 --out " +
                traj + " --report " + rep,
            &out) == 0);
  CHECK(out.find("classification: incorrect-unstable") != std::string::npos);
  io::Json j;
  {
    std::ifstream is(rep);
    is >> j;
  }
  REQUIRE(j.contains("report"));
  std::ostringstream coords;
  coords.precision(17);
  for (std::size_t i = 0; i < 6; ++i) {
    if (i) coords << ",";
    coords << j["report"]["p"][i].get<double>();
  }
  CHECK(run("formation classify --agents 3 --dbar-sq 1,1,1 --at " + coords.str(), &out) == 0);
  CHECK(out.find("incorrect-unstable") != std::string::npos);
  // non-equilibrium input is a usage error
  CHECK(run("formation classify --agents 3 --dbar-sq 1,1,1 --at 0,0,1,0,0,9") == 64);
}

TEST_CASE("cli: trajectory time column is monotone") {
  const std::string traj = kDir + "/cli_mono.csv";
  REQUIRE(run("formation simulate --agents 3 --dbar-sq 1,1,1 --init 0,0,1.5,0.2,0.3,1.1 "
              "--record-every 25 --max-time 50 --out " +
              traj) == 0);
  std::ifstream is(traj);
  std::string line;
  std::getline(is, line);  // header
  double prev = -1.0;
  while (std::getline(is, line)) {
    const double t = std::stod(line.substr(0, line.find(',')));
    CHECK(t > prev);
    prev = t;
  }
  CHECK(prev >= 0.0);
}
