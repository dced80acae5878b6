#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "conescale/cli.hpp"
#include "conescale/error.hpp"
#include "support.hpp"

using namespace conescale;
using namespace conescale::cli;

namespace {

const std::string kData = CONESCALE_TEST_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(Options o) {
  std::ostringstream out, err;
  const int code = run(o, out, err);
  return {code, out.str(), err.str()};
}

Run run_on(const std::string& command, const std::string& file) {
  Options o;
  o.command = command;
  o.problem_path = kData + "/" + file;
  return run_cli(o);
}

std::map<std::string, std::string> meta_of(const std::string& report) {
  std::map<std::string, std::string> m;
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) m[line.substr(2, eq - 2)] = line.substr(eq + 1);
  }
  return m;
}

// Rows of one table, split on commas; the header is the first row.
std::vector<std::vector<std::string>> table_of(const std::string& report, const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(report);
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line == "# table=" + name) {
      inside = true;
      continue;
    }
    if (!inside) continue;
    if (line.empty() || line[0] == '#') break;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string temp_path(const std::string& name) { return std::string(CONESCALE_TEST_WORK) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("problem files round-trip through the canonical form") {
  for (const char* f : {"identity.json", "lambda_plus_i.json", "quadratic.json", "perturbed_small.json",
                        "one_sided.json"}) {
    const ProblemFile p = load_problem(kData + "/" + f);
    const json j = to_json(p);
    CHECK(to_json(parse_problem(j)) == j);
  }
  const ProblemFile c = cylinder_problem(3, kPi / 16);
  CHECK(to_json(parse_problem(to_json(c))) == to_json(c));
  CHECK_THROWS_AS(parse_problem_text("{not json"), ValidationError);
}

TEST_CASE("malformed problem files name the offending field") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"missing_degree.json", "pencil.degree"},
      {"unknown_field.json", "grid.spacing"},
      {"schema_version.json", "schema_version"},
      {"ragged_matrix.json", "pencil.coefficients[0][1]"},
      {"bad_complex.json", "geometry.weight"},
      {"short_grid.json", "grid.count"}};
  for (const auto& [file, field] : cases) {
    CAPTURE(file);
    const Run r = run_on("solve", "malformed/" + file);
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find(field) != std::string::npos);
  }
  CHECK(run_on("solve", "does_not_exist.json").code == 2);
}

TEST_CASE("report format") {
  Report r;
  r.meta("a", "x");
  r.meta("b", -0.0);
  r.begin_table("t", {"c1", "c2"});
  r.row(std::vector<double>{1.5, std::numeric_limits<double>::infinity()});
  r.begin_table("u", {"c"});
  r.row({"z"});
  CHECK(r.render() == "# a=x\n# b=0\n# table=t\nc1,c2\n1.5,inf\n\n# table=u\nc\nz\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("spectrum command") {
  const Run id = run_on("spectrum", "identity.json");
  REQUIRE(id.code == 0);
  const auto rows = table_of(id.out, "spectrum");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == std::vector<std::string>{"re", "im", "multiplicity", "residual"});

  const Run q = run_on("spectrum", "quadratic.json");
  REQUIRE(q.code == 0);
  const auto qr = table_of(q.out, "spectrum");
  REQUIRE(qr.size() == 3);
  CHECK(std::abs(std::stod(qr[1][1]) + 1.0) < 1e-10);
  CHECK(std::abs(std::stod(qr[2][1]) - 1.0) < 1e-10);

  Options small;
  small.command = "spectrum";
  small.problem_path = kData + "/quadratic.json";
  small.radius = 0.5;
  CHECK(table_of(run_cli(small).out, "spectrum").size() == 1);
}

TEST_CASE("clearance command") {
  const Run ok = run_on("clearance", "lambda_plus_i.json");
  CHECK(ok.code == 0);
  CHECK(meta_of(ok.out)["verdict"] == "clear");
}

TEST_CASE("solve command") {
  const Run id = run_on("solve", "identity.json");
  REQUIRE(id.code == 0);
  const auto rows = table_of(id.out, "solution");
  REQUIRE(rows.size() == 4097);
  for (std::size_t k = 1; k < rows.size(); k += 97) {
    const double t = std::stod(rows[k][0]);
    CHECK(std::abs(std::stod(rows[k][1]) - std::exp(-t * t)) <= 1e-14);
    CHECK(std::abs(std::stod(rows[k][2])) <= 1e-14);
  }

  const Run li = run_on("solve", "lambda_plus_i.json");
  REQUIRE(li.code == 0);
  auto m = meta_of(li.out);
  CHECK(std::stod(m["residual"]) <= 1e-6);
  CHECK(std::stod(m["deviation[0.39269908169872414]"]) <= 1e-6);
  CHECK(m["solver"] == "constant");

  Options o;
  o.command = "solve";
  o.problem_path = kData + "/lambda_plus_i.json";
  o.scaled = kPi / 16;
  const Run s = run_cli(o);
  REQUIRE(s.code == 0);
  CHECK(meta_of(s.out).count("deviation[0.19634954084936207]") == 1);

  const Run small = run_on("solve", "perturbed_small.json");
  REQUIRE(small.code == 0);
  m = meta_of(small.out);
  CHECK(m["solver"] == "neumann");
  CHECK(std::stod(m["contraction_ratio"]) <= 0.5);
  CHECK(std::stod(m["iteration_residual"]) <= 1e-8);

  const Run large = run_on("solve", "perturbed_large.json");
  CHECK(large.code == 4);
  CHECK(large.err.find("residual 1 ") != std::string::npos);
}

TEST_CASE("verify suites") {
  Options o;
  o.command = "verify";
  o.problem_path = kData + "/lambda_plus_i.json";
  o.suite = "parseval";
  Run r = run_cli(o);
  REQUIRE(r.code == 0);
  CHECK(std::stod(meta_of(r.out)["max_rel_err"]) <= 1e-6);

  o.suite = "hardy";
  r = run_cli(o);
  REQUIRE(r.code == 0);
  CHECK(meta_of(r.out)["verdict"] == "member-consistent");

  o.suite = "continuation";
  r = run_cli(o);
  REQUIRE(r.code == 0);
  CHECK(meta_of(r.out)["verdict"] == "holds");

  o.problem_path = kData + "/one_sided.json";
  o.suite = "paley-wiener";
  r = run_cli(o);
  REQUIRE(r.code == 0);
  CHECK(meta_of(r.out)["verdict"] == "consistent");
  CHECK(meta_of(r.out)["opposite_verdict"] == "correctly-rejected");

  o.suite = "nonsense";
  CHECK(run_cli(o).code == 2);
}

TEST_CASE("cylinder demo") {
  Options o;
  o.command = "demo-cylinder";
  o.n = 4;
  const Run r = run_cli(o);
  REQUIRE(r.code == 0);
  auto m = meta_of(r.out);
  CHECK(std::stod(m["eigen_max_rel_err"]) <= 1e-10);
  CHECK(m["clearance"] == "clear");
  CHECK(std::stod(m["deviation"]) <= 1e-5);
  CHECK(table_of(r.out, "eigenvalues").size() == 9);

  o.n = 1;
  CHECK(run_cli(o).code == 0);
  o.phi = 0.0;
  const Run flat = run_cli(o);
  REQUIRE(flat.code == 0);
  CHECK(std::stod(meta_of(flat.out)["deviation"]) == 0.0);
  o.n = 0;
  CHECK(run_cli(o).code == 2);
}

TEST_CASE("demo output is deterministic and its problem file reproduces the solution") {
  Options o;
  o.command = "demo-cylinder";
  o.n = 3;
  o.problem_out = temp_path("cli_test_problem.json");
  o.solution_out = temp_path("cli_test_solution.csv");
  const Run a = run_cli(o);
  const std::string sol_a = slurp(o.solution_out);
  const Run b = run_cli(o);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(sol_a == slurp(o.solution_out));

  Options s;
  s.command = "solve";
  s.problem_path = o.problem_out;
  const Run again = run_cli(s);
  REQUIRE(again.code == 0);
  CHECK(again.out == sol_a);
  std::remove(o.problem_out.c_str());
  std::remove(o.solution_out.c_str());
}

}  // TEST_SUITE
