#include "commands.hpp"

int main(int argc, char** argv) { return fiqa::cli::run(argc, argv); }
