#include "cli_app.hpp"

int main(int argc, char** argv) { return sfga::cli::run_cli(argc, argv); }
