#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "nfsrd/parallel.hpp"

int main(int argc, char** argv) {
  nfsrd::configure_threads_from_env();
  std::vector<std::string> args(argv, argv + argc);
  return nfsrd::cli::run(args, std::cout, std::cerr);
}
