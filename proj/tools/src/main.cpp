#include <iostream>

#include "screen_cli/commands.hpp"

int main(int argc, char** argv) { return screen::cli::run(argc, argv, std::cout, std::cerr); }
