// Build-step transpiler: the full CLI without compiled-in grammars.
#include <iostream>

#include "gevo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gevo::run_cli(args, std::cout, std::cerr, {});
}
