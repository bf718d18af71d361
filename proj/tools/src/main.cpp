#include <iostream>

#include "mnar_cli.hpp"

int main(int argc, char** argv) { return mnar::cli::run(argc, argv, std::cout, std::cerr); }
