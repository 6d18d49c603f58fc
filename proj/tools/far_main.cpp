#include "far/cli.hpp"

int main(int argc, char** argv) { return far::cli_dispatch(argc, argv); }
