#include "fdslrm_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return fdslrm::cli::run(argc, argv, std::cout, std::cerr); }
