#include "mre/harness/cli.hpp"

int main(int argc, char** argv) { return mre::harness::cli_main(argc, argv); }
