#include <string>
#include <vector>

#include "iafmc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return iafmc::run_cli(args);
}
