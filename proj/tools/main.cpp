#include <iostream>

#include "nnrange/cli.hpp"

int main(int argc, char** argv) { return nnrange::run_cli(argc, argv, std::cout, std::cerr); }
