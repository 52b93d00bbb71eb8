#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return njcli::dispatch(argc, argv, std::cout, std::cerr); }
