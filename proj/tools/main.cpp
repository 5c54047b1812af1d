#include "rollidx/app/runner.hpp"

int main(int argc, char** argv) { return rollidx::app::run_cli(argc, argv); }
