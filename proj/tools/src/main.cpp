#include <iostream>

#include "apiso/cli.hpp"

int main(int argc, char** argv) { return apiso::cli::dispatch(argc, argv, std::cout, std::cerr); }
