#include "dwellrec/cli.hpp"

int main(int argc, char** argv) { return dwellrec::cli::dispatch(argc, argv); }
