#include <iostream>

#include "gridsur/cli.hpp"

int main(int argc, char** argv) { return gridsur::dispatch(argc, argv, std::cout, std::cerr); }
