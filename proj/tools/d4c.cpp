#include <csignal>

#include "d4c/cli.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_sigint);
    std::signal(SIGTERM, on_sigint);
    d4c::CliEnv env = d4c::CliEnv::process();
    env.cancel = &g_interrupted;
    return d4c::run_cli({argv + 1, argv + argc}, env);
}
