#include <cstdio>

int main() {
    std::puts("convexroof CLI placeholder");
    return 0;
}
