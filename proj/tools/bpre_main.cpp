#include <iostream>

#include "bpre/cli.hpp"

int main(int argc, char** argv) {
  return bpre::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
