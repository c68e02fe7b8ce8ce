#include "rfpls/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rfpls::cli::run(argc, argv, std::cout, std::cerr); }
