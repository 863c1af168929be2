#include <iostream>

#include "herdtrack/cli.hpp"

int main(int argc, char** argv) {
  return herdtrack::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
