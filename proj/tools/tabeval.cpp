#include "tabeval/cli.hpp"

int main(int argc, char** argv) { return tabeval::cli::run(argc, argv); }
