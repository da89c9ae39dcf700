#include "cli.hpp"

int main(int argc, char** argv) { return triadkit::cli::run(argc, argv); }
