#include "pair/cli.hpp"

int main(int argc, char **argv) { return pair::cli::run(argc, argv); }
