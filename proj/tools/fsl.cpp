#include <iostream>
#include <string>
#include <vector>

#include "fsl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return fsl::cli::dispatch(args, std::cout, std::cerr);
}
