#include "omnidfa/cli.hpp"

int main(int argc, char** argv) {
    return omnidfa::run_cli(argc, argv);
}
