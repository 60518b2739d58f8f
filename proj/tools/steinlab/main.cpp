#include <iostream>

#include "steinlab/runner.hpp"

int main(int argc, char** argv) { return steinlab::cli::run(argc, argv, std::cout, std::cerr); }
