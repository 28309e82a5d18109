#include <iostream>

#include "cclab/cli.hpp"

int main(int argc, char** argv) { return cclab::run_cli(argc, argv, std::cout, std::cerr); }
