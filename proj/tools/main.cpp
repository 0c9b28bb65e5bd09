#include "mapflux/cli.hpp"

int main(int argc, char** argv) { return mapflux::cli::run(argc, argv); }
