#include <iostream>

#include "oscdmrg/harness.hpp"

int main(int argc, char** argv) { return oscdmrg::run_cli(argc, argv, std::cout, std::cerr); }
