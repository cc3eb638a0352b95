#include "roughstep/cli.hpp"

int main(int argc, char** argv) { return roughstep::cli::main(argc, argv); }
