#include "gid/cli.hpp"

int main(int argc, char** argv) { return gid::cli::main(argc, argv); }
