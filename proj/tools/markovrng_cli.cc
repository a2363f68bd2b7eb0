#include "markovrng/cli.h"

int main(int argc, char** argv) { return markovrng::run_cli(argc, argv); }
