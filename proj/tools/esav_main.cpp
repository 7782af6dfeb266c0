#include "esav/cli_io.hpp"

int main(int argc, char** argv) { return esav::cli_main(argc, argv); }
