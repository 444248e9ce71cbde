#include <iostream>

#include "pcc/cli.hpp"

int main(int argc, char** argv) { return pcc::run_cli(argc, argv, std::cout, std::cerr); }
