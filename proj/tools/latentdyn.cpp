#include <iostream>
#include <string>
#include <vector>

#include "latentdyn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return latentdyn::cli::run(args, std::cout, std::cerr);
}
