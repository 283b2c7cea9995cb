#include <iostream>

#include "bridgeflow/cli.hpp"

int main(int argc, char** argv) {
  return bridgeflow::cli::run_cli(argc, argv, std::cout, std::cerr);
}
