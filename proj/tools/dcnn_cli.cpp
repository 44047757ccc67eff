#include "dcnn/cli.hpp"

int main(int argc, char** argv) { return dcnn::run_cli(argc, argv); }
