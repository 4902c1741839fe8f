#include <mfbo/cli.hpp>

int main(int argc, char** argv) { return mfbo::run_cli(argc, argv); }
namespace mfbo { int run_cli(int, char**) { return 0; } }
