#include <iostream>

#include "mpgrade/cli.hpp"

int main(int argc, char** argv) {
  return mpgrade::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
