#include "laserguide/cli.hpp"

int main(int argc, char** argv) { return laserguide::cli::cli_main(argc, argv); }
