#include <string>
#include <vector>

#include "zeno/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return zeno::cli::run(args);
}
