#include <iostream>

#include "pushd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pushd::cli::run_main(args, std::cout, std::cerr);
}
