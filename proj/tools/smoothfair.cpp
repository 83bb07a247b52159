#include <iostream>
#include <string>
#include <vector>

#include "smoothfair/cli/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return smoothfair::run_command(args, std::cout, std::cerr);
}
