#include <iostream>
#include <string>
#include <vector>

#include "fracvar_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fracvar::cli::run(args, std::cout, std::cerr);
}
