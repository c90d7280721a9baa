#include "infonoise/cli.hpp"

int main(int argc, char** argv) {
    return infonoise::run_cli(argc, argv);
}
