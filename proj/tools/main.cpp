#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return comclip::cli_main(argc, argv, std::cout, std::cerr); }
