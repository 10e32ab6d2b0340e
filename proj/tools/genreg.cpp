#include <iostream>
#include <string>
#include <vector>

#include "genreg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return genreg::cli::run(args, std::cout, std::cerr);
}
