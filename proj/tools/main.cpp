#include <cstdio>

int main(int, char**) {
    std::puts("cli not wired yet");
    return 0;
}
