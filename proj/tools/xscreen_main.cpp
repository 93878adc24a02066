#include "xscreen/cli.hpp"

int main(int argc, char** argv) { return xscreen::cli::run(argc, argv); }
