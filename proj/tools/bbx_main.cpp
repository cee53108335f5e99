#include "bbx/cli.hpp"

int main(int argc, char** argv) { return bbx::cli::main(argc, argv); }
