#include "supercrit/cli.hpp"

int main(int argc, char** argv) { return supercrit::cli_dispatch(argc, argv); }
