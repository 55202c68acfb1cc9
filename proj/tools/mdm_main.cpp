#include <iostream>

#include "mdm/cli.hpp"

int main(int argc, char** argv) { return mdm::cli::run(argc, argv, std::cout, std::cerr); }
