#include "sklc/cli.hpp"

int main(int argc, char** argv) { return sklc::cli::run(argc, argv); }
