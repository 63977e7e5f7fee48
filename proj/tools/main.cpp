#include "legfol/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return legfol::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
