#include <iostream>

#include "ruleforge/cli.hpp"

int main(int argc, char** argv) { return ruleforge::run_command(argc, argv, std::cout, std::cerr); }
