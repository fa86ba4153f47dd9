#include <iostream>

#include "specled/service.hpp"

int main(int argc, char **argv) {
    return specled::service::run_cli(argc, argv, std::cout, std::cerr);
}
