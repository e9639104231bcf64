#include <string>
#include <vector>

#include "mp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mp::run_cli(args);
}
