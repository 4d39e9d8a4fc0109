#include "krclust/cli.hpp"

int main(int argc, char** argv) { return krclust::cli::dispatch(argc, argv); }
