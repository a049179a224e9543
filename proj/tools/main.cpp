#include "pllab/cli.hpp"

int main(int argc, char** argv) { return pllab::cli::run(argc, argv); }
