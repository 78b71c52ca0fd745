#include <iostream>

#include "evoplan/cli.hpp"

int main(int argc, char** argv) {
  return evoplan::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
