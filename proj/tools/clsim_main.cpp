#include "clsim/experiments.hpp"

int main(int argc, char** argv) { return clsim::run_cli(argc, argv); }
