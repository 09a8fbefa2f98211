#include <iostream>

#include "kpsd_cli.hpp"

int main(int argc, char** argv)
{
    return kpsd::cli::run_cli(argc, argv, std::cout, std::cerr);
}
