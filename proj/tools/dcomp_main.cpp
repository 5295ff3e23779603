#include "dcomp/cli.hpp"

int main(int argc, char** argv) { return dcomp::run_cli(argc, argv); }
