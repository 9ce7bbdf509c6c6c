#include <iostream>

#include "qpsense/cli.hpp"

int main(int argc, char** argv) { return qps::cli::run(argc, argv, std::cout, std::cerr); }
