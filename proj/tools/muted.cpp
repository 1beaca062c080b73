#include <iostream>
#include <string>
#include <vector>

#include "muted/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return muted::run_cli(args, std::cout, std::cerr);
}
