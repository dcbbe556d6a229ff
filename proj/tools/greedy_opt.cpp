#include "greedy_opt/experiment.hpp"

int main(int argc, char** argv) { return greedy_opt::run_cli(argc, argv); }
