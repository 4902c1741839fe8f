#pragma once

namespace mfbo {
int run_cli(int argc, char** argv);
}  // namespace mfbo
