#include <iostream>

#include "bimax/cli.hpp"

int main(int argc, char **argv) {
    return bimax::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
