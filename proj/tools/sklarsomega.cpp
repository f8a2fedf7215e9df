#include "sklarsomega/cli.hpp"

int main(int argc, char** argv) { return sklarsomega::cli::run(argc, argv); }
