#include "elue/cli.hpp"

int main(int argc, char** argv) { return elue::cli::run(argc, argv); }
