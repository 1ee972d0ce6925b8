#include <iostream>
#include <string>
#include <vector>

#include "svsc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return svsc::run_command(args, std::cout, std::cerr);
}
