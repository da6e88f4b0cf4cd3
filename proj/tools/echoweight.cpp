#include "echoweight/cli.hpp"

int main(int argc, char** argv) { return echoweight::cli::run(argc, argv); }
