#include "pwr/cli/app.hpp"

int main(int argc, char** argv) { return pwr::cli::run(argc, argv); }
