#include "geoctx_cli/cli.hpp"

int main(int argc, char** argv) { return geoctx::cli::cli_main(argc, argv); }
