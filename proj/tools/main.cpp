#include "jitchrono/cli.hpp"

int main(int argc, char** argv) { return jitchrono::cli_main(argc, argv); }
