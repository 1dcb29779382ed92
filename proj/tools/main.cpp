#include "cli_main.hpp"

int main(int argc, char** argv) { return paws::cli_main(argc, argv); }
