#include "socialsim/cli.hpp"

int main(int argc, char** argv) { return socialsim::cli::run_cli(argc, argv); }
