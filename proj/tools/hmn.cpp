#include <iostream>
#include <string>
#include <vector>

#include "hmn/cli/commands.hpp"
#include "hmn/log.hpp"

int main(int argc, char** argv) {
  hmn::init_logging();
  std::vector<std::string> args(argv + 1, argv + argc);
  return hmn::cli::run(args, std::cin, std::cout, std::cerr);
}
