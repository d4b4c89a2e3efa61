#include <iostream>
#include <string>
#include <vector>

#include "clinn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return clinn::cli::run(args, std::cout, std::cerr);
}
