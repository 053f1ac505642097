#include <spikevol/cli.hpp>

int main(int argc, char** argv) { return spikevol::cli::parse_and_dispatch(argc, argv); }
