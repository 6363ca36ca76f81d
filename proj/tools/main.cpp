#include <iostream>
#include <string>
#include <vector>

#include "diffinv/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return diffinv::cli::run(args, std::cout, std::cerr);
}
