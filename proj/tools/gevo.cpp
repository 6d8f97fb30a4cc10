#include <iostream>

#include "gevo/cli.hpp"
#include "gevo/corpus.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gevo::run_cli(args, std::cout, std::cerr, gevo::corpus());
}
