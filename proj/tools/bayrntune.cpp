#include "bayrn/cli.hpp"

int main(int argc, char** argv) {
    return bayrn::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
