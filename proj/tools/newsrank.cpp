#include "newsrank/cli.hpp"

int main(int argc, char** argv) { return newsrank::cli::run(argc, argv); }
