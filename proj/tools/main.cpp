#include <iostream>

#include "bayesdr/cli.hpp"

int main(int argc, char** argv) { return bayesdr::run_cli(argc, argv, std::cout, std::cerr); }
