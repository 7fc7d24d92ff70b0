#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return eivpd::cli::run({ argv, argv + argc }, std::cout, std::cerr);
}
