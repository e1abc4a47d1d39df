#include "cli.hpp"

int main(int argc, char** argv) { return pullsim::cli_main(argc, argv); }
