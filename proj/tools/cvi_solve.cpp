#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cvi/harness/experiment.hpp"

int main(int argc, char** argv) {
  using namespace cvi::harness;
  CLI::App app{"Solver and benchmark runner for constrained variational inequalities"};
  app.require_subcommand(1);

  std::string spec_path;
  auto* run = app.add_subcommand("run", "Run one experiment spec");
  run->add_option("spec", spec_path, "Spec file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a sweep spec");
  sweep->add_option("spec", spec_path, "Spec file")->required();

  std::string a, b;
  double tol = 0.0;
  auto* compare = app.add_subcommand("compare", "Compare two trace CSVs by iteration");
  compare->add_option("a", a, "First CSV")->required();
  compare->add_option("b", b, "Second CSV")->required();
  compare->add_option("--tol", tol, "Largest accepted absolute deviation");

  auto* list_problems = app.add_subcommand("list-problems", "List problem names");
  auto* list_methods = app.add_subcommand("list-methods", "List method names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  if (run->parsed()) return cli_run(spec_path, std::cout, std::cerr);
  if (sweep->parsed()) return cli_sweep(spec_path, std::cout, std::cerr);
  if (compare->parsed()) return cli_compare(a, b, tol, std::cout, std::cerr);
  if (list_problems->parsed()) return cli_list_problems(std::cout);
  if (list_methods->parsed()) return cli_list_methods(std::cout);
  return kValidationError;
}
