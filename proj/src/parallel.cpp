#include "nsalpha/parallel.hpp"

#include <atomic>

namespace nsalpha {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) { g_threads.store(std::max(1, threads)); }

int thread_count() { return g_threads.load(); }

}  // namespace nsalpha
