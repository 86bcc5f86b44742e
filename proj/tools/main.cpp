#include <iostream>

#include "playtime/cli.hpp"

int main(int argc, char** argv) {
  return playtime::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
