#include <iostream>

#include "mcmplan/cli.hpp"

int main(int argc, char** argv) { return mcmplan::cli::run(argc, argv, std::cout, std::cerr); }
