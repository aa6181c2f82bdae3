#include <cstdio>

int main() {
    std::puts("relrank: subcommands not wired yet");
    return 0;
}
