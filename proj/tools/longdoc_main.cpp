#include "longdoc/cli.hpp"

int main(int argc, char** argv) { return longdoc::run_cli(argc, argv); }
