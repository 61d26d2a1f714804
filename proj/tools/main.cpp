#include "hybridcycles/cli.hpp"

int main(int argc, char** argv) { return hybridcycles::run_cli(argc, argv); }
