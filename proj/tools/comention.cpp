#include "comention/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return comention::cli_main(argc, argv, std::cout, std::cerr); }
