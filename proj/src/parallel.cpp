#include "nlft/parallel.hpp"

namespace nlft {

namespace {
std::atomic<int> configured_threads{0};
}

void set_thread_count(int n) { configured_threads = std::max(0, n); }

int thread_count() {
  const int n = configured_threads.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace nlft
