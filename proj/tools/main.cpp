#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
    arkan::cli::configure_logging();
    return arkan::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
