#include "tqd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tqd::cli::run(argc, argv, std::cout, std::cerr); }
