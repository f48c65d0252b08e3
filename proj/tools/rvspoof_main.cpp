#include <iostream>
#include <vector>

#include "rvspoof/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rvspoof::run_cli(args, std::cout, std::cerr);
}
