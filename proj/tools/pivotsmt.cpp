#include "pivotsmt/cli.hpp"

int main(int argc, char** argv) { return pivotsmt::cli::main_entry(argc, argv); }
