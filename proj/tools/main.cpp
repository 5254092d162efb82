#include "cli/app.hpp"

int main(int argc, char** argv) { return bubbletower::cli::run(argc, argv); }
