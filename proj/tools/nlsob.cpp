#include "nlsob/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return nlsob::cli::main(argc, argv, std::cout, std::cerr);
}
