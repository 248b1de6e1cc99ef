#include <string>
#include <vector>

#include "psdc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return psdc::cli::run(args);
}
