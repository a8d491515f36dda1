#include <iostream>

#include "spw/cli.hpp"

int main(int argc, char** argv) { return spw::cli::run(argc, argv, std::cout, std::cerr); }
