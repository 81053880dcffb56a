#include <iostream>
#include <string>
#include <vector>

#include "sqa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return sqa::run_command(args, std::cout, std::cerr);
}
