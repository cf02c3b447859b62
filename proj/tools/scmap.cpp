#include <iostream>
#include <string>
#include <vector>

#include "scmap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return scmap::run_cli(args, std::cout, std::cerr);
}
