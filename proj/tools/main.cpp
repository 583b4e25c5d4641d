#include <cstdio>

int main() {
  std::puts("nleach: CLI not wired yet");
  return 0;
}
