#include <bbmax/cli.hpp>

int main(int argc, char** argv) { return bbmax::run_cli(argc, argv); }
