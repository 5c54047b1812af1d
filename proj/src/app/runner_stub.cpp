#include "rollidx/app/runner.hpp"

#include <cstdio>

namespace rollidx::app {

int run_cli(int, char**) {
    std::fputs("rollidx: CLI not wired yet\n", stderr);
    return 1;
}

} // namespace rollidx::app
