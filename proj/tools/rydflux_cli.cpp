#include <iostream>

#include "rydflux/cli.hpp"

int main(int argc, char** argv) { return rydflux::run(argc, argv, std::cout, std::cerr); }
