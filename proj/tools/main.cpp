#include <iostream>

#include "kclf/cli.hpp"

int main(int argc, char** argv) { return kclf::run_cli(argc, argv, std::cout, std::cerr); }
