#include "nfl/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace nfl {

int max_workers() {
  if (const char* env = std::getenv("NFL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn,
                  int threads) {
  if (n <= 0) return;
  int w = threads > 0 ? threads : max_workers();
  w = static_cast<int>(std::min<int64_t>(w, n));
  if (w <= 1) {
    fn(0, n);
    return;
  }
  // contiguous blocks; the split depends only on (n, w)
  std::vector<std::thread> pool;
  pool.reserve(w);
  const int64_t base = n / w, extra = n % w;
  int64_t begin = 0;
  for (int i = 0; i < w; ++i) {
    const int64_t len = base + (i < extra ? 1 : 0);
    const int64_t end = begin + len;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace nfl
