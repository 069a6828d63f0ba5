#include "mimolab/parallel.hpp"

#include <memory>

namespace mimolab {

namespace {
std::unique_ptr<ThreadPool> g_pool;
unsigned g_requested = 0;
}  // namespace

ThreadPool& global_pool() {
    if (!g_pool) {
        unsigned n = g_requested;
        if (n == 0) {
            n = std::thread::hardware_concurrency();
            if (n == 0) n = 1;
        }
        g_pool = std::make_unique<ThreadPool>(n);
    }
    return *g_pool;
}

void set_global_workers(unsigned nthreads) {
    g_requested = nthreads;
    g_pool.reset();
    if (nthreads > 0) g_pool = std::make_unique<ThreadPool>(nthreads);
}

}  // namespace mimolab
