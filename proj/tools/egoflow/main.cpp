#include <iostream>

#include "egoflow/cli.hpp"

int main(int argc, char** argv) {
    return egoflow::cli::run(argc, argv, std::cout, std::cerr);
}
