#include "critpeak/cli.hpp"

int main(int argc, char** argv) { return critpeak::cli::main(argc, argv); }
