#include <iostream>

#include "periph/cli.hpp"

int main(int argc, char** argv) { return periph::cli::run_cli(argc, argv, std::cout, std::cerr); }
