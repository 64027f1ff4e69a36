#include <iostream>

#include "novelty/cli.hpp"

int main(int argc, char** argv) { return novelty::run_cli(argc, argv, std::cout, std::cerr); }
