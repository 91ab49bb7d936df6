#include <iostream>
#include <string>
#include <vector>

#include "lobswitch/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return lobswitch::dispatch(args, std::cout, std::cerr);
}
