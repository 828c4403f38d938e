#include <iostream>

#include "panelcause/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return panelcause::cli::run(args, std::cout, std::cerr);
}
