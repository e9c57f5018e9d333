#include <iostream>

#include "aqsim/cli/app.hpp"

int main(int argc, char** argv) { return aqsim::cli::run(argc, argv, std::cout, std::cerr); }
