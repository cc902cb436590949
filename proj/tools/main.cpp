#include "ghsec/cli.hpp"

int main(int argc, char** argv)
{
    return ghsec::cli::run_command(argc, argv);
}
