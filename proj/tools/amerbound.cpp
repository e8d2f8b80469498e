#include "amerbound/cli.hpp"

int main(int argc, char** argv) { return amerbound::cli::main(argc, argv); }
