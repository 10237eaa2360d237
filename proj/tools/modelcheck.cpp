#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equivalence and order reduction of input/output models"};
  ioid::cli::add_equiv(app);
  ioid::cli::add_reduce(app);
  return ioid::cli::run(app, argc, argv);
}
