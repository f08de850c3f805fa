#include "czgate/cli.hpp"

int main(int argc, char** argv) { return czgate::cli::run(argc, argv); }
