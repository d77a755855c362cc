#include "sigma_collapse/cli.h"

int main(int argc, char** argv) { return sigma::cli::dispatch(argc, argv); }
