#include <iostream>

#include "rigidcal/cli.hpp"

int main(int argc, char** argv) { return rigidcal::cli::run(argc, argv, std::cout, std::cerr); }
