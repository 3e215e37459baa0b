#include <iostream>
#include <string>
#include <vector>

#include "hornpoc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hornpoc::cli_main(args, std::cout, std::cerr);
}
