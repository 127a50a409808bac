#include <iostream>

#include "mwe_cli/commands.hpp"

int main(int argc, char** argv) { return mwe::cli::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
