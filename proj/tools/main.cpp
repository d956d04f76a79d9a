#include <cstdio>

int main() {
  std::puts("semcom: CLI under construction");
  return 2;
}
