#pragma once

namespace rollidx::app {

// Entry point for the rollidx command-line tool; returns the process exit
// code (0 ok, 1 validation, 2 numerical, 3 non-convergence).
int run_cli(int argc, char** argv);

} // namespace rollidx::app
