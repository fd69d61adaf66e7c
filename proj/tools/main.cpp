#include <iostream>

#include "sgdinfer/cli.hpp"

int main(int argc, char** argv) { return sgdinfer::cli::main_entry(argc, argv, std::cout, std::cerr); }
