#include <iostream>
#include <string>
#include <vector>

#include "haarprod/experiment.hpp"

int main(int argc, char** argv) {
    return haarprod::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
