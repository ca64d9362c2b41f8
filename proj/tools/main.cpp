#include <iostream>
#include <string>
#include <vector>

#include "miot/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return miot::cli::run(args, std::cout, std::cerr);
}
