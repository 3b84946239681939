#include <iostream>

#include "manin/cli.hpp"

int main(int argc, char** argv) { return manin::cli_main(argc, argv, std::cout, std::cerr); }
