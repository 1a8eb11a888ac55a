#include <iostream>
#include <string>
#include <vector>

#include "rmtnorm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rmtnorm::cli::dispatch(args, std::cout, std::cerr);
}
