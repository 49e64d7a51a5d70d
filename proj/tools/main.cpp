#include <iostream>
#include <string>
#include <vector>

#include "mlm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return mlm::cli::run(args, std::cout, std::cerr);
}
