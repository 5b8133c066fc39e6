#include "slab/cli.hpp"

int main(int argc, char** argv) { return slab::cli::main_entry(argc, argv); }
