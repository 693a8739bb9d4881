#include <cstdio>

int main() {
    std::puts("tsweave: subcommands not wired up yet");
    return 1;
}
