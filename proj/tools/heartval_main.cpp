#include <iostream>

#include "heartval/cli.hpp"

int main(int argc, char** argv) {
  return heartval::cli::run_cli(argc, argv, std::cout, std::cerr);
}
