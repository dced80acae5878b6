#include <iostream>

#include "CLI11.hpp"

#include "conescale/cli.hpp"
#include "conescale/error.hpp"
#include "conescale/parallel.hpp"

int main(int argc, char** argv) {
  using conescale::cli::Options;
  Options o;
  int threads = 1;

  CLI::App app{"Complex-scaling solver for operator pencils on cones"};
  app.set_version_flag("--version", CONESCALE_VERSION);
  app.require_subcommand(1);
  app.add_option("--out", o.out, "Report path (default stdout)");
  app.add_option("--threads", threads, "Worker threads; affects speed only")->check(CLI::PositiveNumber);

  auto* spectrum = app.add_subcommand("spectrum", "Finite eigenvalues of the pencil");
  spectrum->add_option("problem", o.problem_path)->required();
  spectrum->add_option("--radius", o.radius, "Keep eigenvalues with |lambda| <= radius");

  auto* clearance = app.add_subcommand("clearance", "Check that the cone is free of eigenvalues");
  clearance->add_option("problem", o.problem_path)->required();
  clearance->add_option("--radius", o.radius, "Search radius");

  auto* solve = app.add_subcommand("solve", "Solve on the real line");
  solve->add_option("problem", o.problem_path)->required();
  solve->add_option("--scaled", o.scaled, "Also run the scaled solve at this angle");

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("problem", o.problem_path)->required();
  verify->add_option("--suite", o.suite)
      ->check(CLI::IsMember({"parseval", "hardy", "paley-wiener", "continuation"}));
  verify->add_option("--scaled", o.scaled, "Angle override for the parseval and continuation suites");
  verify->add_option("--support", o.support, "Support side for paley-wiener")
      ->check(CLI::IsMember({"backward", "forward"}));

  auto* demo = app.add_subcommand("demo-cylinder", "Generate and run the cylinder demo");
  demo->add_option("--n", o.n, "Interior cross-section points");
  demo->add_option("--phi", o.phi, "Scaling angle");
  demo->add_option("--problem-out", o.problem_out, "Write the generated problem file");
  demo->add_option("--solution-out", o.solution_out, "Write the solve report of the generated problem");

  for (auto* sub : {spectrum, clearance, solve, verify, demo}) {
    sub->add_option("--out", o.out, "Report path (default stdout)");
    sub->add_option("--threads", threads, "Worker threads; affects speed only")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : conescale::exit_code(conescale::ErrorCategory::validation);
  }
  o.command = app.get_subcommands().front()->get_name();
  conescale::set_thread_count(threads);
  return conescale::cli::run(o, std::cout, std::cerr);
}
