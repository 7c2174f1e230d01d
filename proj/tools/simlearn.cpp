#include "simlearn/cli.hpp"

int main(int argc, char** argv) { return simlearn::cli::main(argc, argv); }
