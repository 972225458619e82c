#include <iostream>

#include "kvf/cli.hpp"

int main(int argc, char** argv) {
  return kvf::run_cli(argc, argv, std::cout, std::cerr);
}
