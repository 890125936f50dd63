#include "rpkitor/cli.hpp"

int main(int argc, char** argv) { return rpkitor::cli::run(argc, argv); }
