#include <vector>

#include "chs/cli.hpp"

int main(int argc, char** argv) {
    return chs::run_cli(std::vector<std::string>(argv, argv + argc));
}
