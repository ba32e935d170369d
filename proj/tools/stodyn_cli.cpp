#include "stodyn/cli.hpp"

int main(int argc, char** argv) { return stodyn::cli_main(argc, argv); }
