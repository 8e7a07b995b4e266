#include "clicktime/cli.hpp"

int main(int argc, char** argv) {
    return clicktime::run_cli({argv + 1, argv + argc});
}
