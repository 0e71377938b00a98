#include "dpg_heat/cli.hpp"

int main(int argc, char** argv) { return dpg_heat::cli::run_cli(argc, argv); }
