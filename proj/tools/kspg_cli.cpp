#include <iostream>

#include "kspg/cli.hpp"

int main(int argc, char** argv) { return kspg::cli::run(argc, argv, std::cout, std::cerr); }
