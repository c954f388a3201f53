#include "postclust/cli.hpp"

int main(int argc, char** argv) { return postclust::cli_main(argc, argv); }
