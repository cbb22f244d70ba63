#include "romkit/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return romkit::cli::run(argc, argv, std::cout, std::cerr);
}
