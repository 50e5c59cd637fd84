// Test runner: compiles the amalgamated Catch2 implementation once.
#include <catch2/catch_amalgamated.cpp>
