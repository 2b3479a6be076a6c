#include "mfsp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mfsp::cli::run(argc, argv, std::cout, std::cerr); }
