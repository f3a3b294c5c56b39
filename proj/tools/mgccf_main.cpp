#include <string>
#include <vector>

#include "mgccf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mgccf::run_cli(args);
}
