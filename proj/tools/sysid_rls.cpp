#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Recursive least squares identification of input/output models"};
  ioid::cli::add_fit(app);
  ioid::cli::add_excite(app);
  ioid::cli::add_equiv(app);
  ioid::cli::add_reduce(app);
  ioid::cli::add_converge(app);
  ioid::cli::add_experiment(app);
  return ioid::cli::run(app, argc, argv);
}
