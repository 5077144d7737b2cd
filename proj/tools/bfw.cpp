#include <iostream>
#include <string>
#include <vector>

#include "bfw/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return bfw::cli::run_cli(args, std::cout, std::cerr);
}
