#include "apmionet/cli/commands.hpp"

int main(int argc, char** argv) { return apmionet::run_cli(argc, argv); }
