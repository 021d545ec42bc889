#include "diswap/cli.hpp"

int main(int argc, char** argv) { return diswap::cli::run(argc, argv); }
