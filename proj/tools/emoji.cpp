#include <iostream>

#include "emoji/cli.hpp"

int main(int argc, char** argv) { return emoji::run_cli(argc, argv, std::cout, std::cerr); }
