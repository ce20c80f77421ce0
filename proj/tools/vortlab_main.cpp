#include "vortlab/cli.hpp"

int main(int argc, char** argv) { return vortlab::run_cli(argc, argv); }
