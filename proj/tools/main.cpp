#include <iostream>

#include "carisk/cli/app.hpp"

int main(int argc, char** argv) {
    return carisk::cli::run(argc, argv, std::cout, std::cerr);
}
