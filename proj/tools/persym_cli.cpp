#include "persym/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return persym::cli::run_cli(argc, argv, std::cout, std::cerr); }
