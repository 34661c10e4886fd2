#include <iostream>

#include "stochpath/cli.hpp"

int main(int argc, char** argv) { return stochpath::cli::run(argc, argv, std::cout, std::cerr); }
