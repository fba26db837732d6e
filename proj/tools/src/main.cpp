#include <iostream>

#include "friedrichs_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return friedrichs::cli::run(args, std::cout, std::cerr);
}
