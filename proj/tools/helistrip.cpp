#include <string>
#include <vector>

#include "helistrip/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return helistrip::cli::main(args);
}
