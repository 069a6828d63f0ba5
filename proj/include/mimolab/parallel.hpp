#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mimolab {

// Fixed-size pool of long-lived workers. Work is submitted as an indexed
// job [0, njobs); workers grab indices from a shared counter. run() blocks
// until every index has been processed, so the pool behaves like a fork/join
// region and never interleaves two jobs.
class ThreadPool {
public:
    explicit ThreadPool(unsigned nthreads) {
        if (nthreads == 0) nthreads = 1;
        for (unsigned t = 0; t + 1 < nthreads; ++t) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

    // fn(i) is called exactly once for each i in [0, njobs). The calling
    // thread participates, so a pool of size 1 degenerates to a plain loop.
    void run(size_t njobs, const std::function<void(size_t)>& fn) {
        if (njobs == 0) return;
        if (size() == 1 || njobs == 1) {
            for (size_t i = 0; i < njobs; ++i) fn(i);
            return;
        }
        {
            std::lock_guard<std::mutex> lk(mu_);
            fn_ = &fn;
            njobs_ = njobs;
            next_ = 0;
            inflight_ = 0;
            generation_++;
        }
        cv_.notify_all();
        drain();
        {
            std::unique_lock<std::mutex> lk(mu_);
            done_cv_.wait(lk, [this] { return next_ >= njobs_ && inflight_ == 0; });
            fn_ = nullptr;
        }
    }

private:
    void drain() {
        for (;;) {
            size_t i;
            {
                std::lock_guard<std::mutex> lk(mu_);
                if (next_ >= njobs_) return;
                i = next_++;
                inflight_++;
            }
            (*fn_)(i);
            {
                std::lock_guard<std::mutex> lk(mu_);
                inflight_--;
            }
        }
    }

    void worker_loop() {
        uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
            }
            for (;;) {
                size_t i;
                {
                    std::lock_guard<std::mutex> lk(mu_);
                    if (next_ >= njobs_) break;
                    i = next_++;
                    inflight_++;
                }
                (*fn_)(i);
                bool finished;
                {
                    std::lock_guard<std::mutex> lk(mu_);
                    inflight_--;
                    finished = next_ >= njobs_ && inflight_ == 0;
                }
                if (finished) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(size_t)>* fn_ = nullptr;
    size_t njobs_ = 0;
    size_t next_ = 0;
    size_t inflight_ = 0;
    uint64_t generation_ = 0;
    bool stop_ = false;
};

// Process-wide pool used by the compute kernels and Monte Carlo loops.
// Sized once (CLI --workers); defaults to the hardware thread count.
ThreadPool& global_pool();
void set_global_workers(unsigned nthreads);

}  // namespace mimolab
