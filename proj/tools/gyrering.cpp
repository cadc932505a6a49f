#include "gyrering/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return gyrering::cli::run(argc, argv, std::cout, std::cerr);
}
