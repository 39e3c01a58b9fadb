#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "surveykg/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return surveykg::run_cli(args, std::cin, std::cout, std::cerr, isatty(STDIN_FILENO) != 0);
}
