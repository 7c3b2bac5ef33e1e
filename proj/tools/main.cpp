#include <iostream>

#include "cli_runner.hpp"

int main(int argc, char** argv) {
  return wavedeform::cli::run_cli(argc, argv, std::cout, std::cerr);
}
