#include "dmp/cli/app.hpp"

int main(int argc, char** argv) { return dmp::cli::run_cli(argc, argv); }
