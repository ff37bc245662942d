#include <iostream>

#include "minrel/cli.hpp"

int main(int argc, char** argv) {
  return minrel::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
