#include "mdbmlab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mdbmlab::run_cli(argc, argv, std::cout, std::cerr); }
