#include <iostream>

#include "peakonlab_cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return peakonlab::cli::run_cli(argc, argv, std::cout, std::cerr);
}
