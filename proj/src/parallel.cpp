#include "pomdplab/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace pomdplab {

namespace {
std::atomic<int> g_thread_cap{0};
}

int max_threads() {
    int cap = g_thread_cap.load();
    if (cap <= 0) {
        if (const char* env = std::getenv("POMDP_LAB_THREADS")) {
            cap = std::atoi(env);
        }
    }
#ifdef _OPENMP
    int hw = omp_get_max_threads();
#else
    int hw = 1;
#endif
    if (cap <= 0) return hw;
    return cap < hw ? cap : hw;
}

void set_thread_cap(int n) { g_thread_cap.store(n); }

}  // namespace pomdplab
