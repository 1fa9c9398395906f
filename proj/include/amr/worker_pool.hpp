#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace amr {

/// Fixed-size pool for index-parallel loops.
///
/// parallel_for(n, fn) calls fn(i) exactly once for every i in [0, n) and
/// returns when all calls finished. Callers write results into slot i and
/// combine slots in index order afterwards; that keeps outputs independent of
/// the worker count. A pool of size 1 (or a call made from inside a pool task)
/// runs the loop inline on the calling thread.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers = 1);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t workers() const noexcept { return threads_.size() + 1; }

    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

    /// Shared serial pool for callers that do not care about parallelism.
    static WorkerPool& serial();

private:
    void worker_loop();
    void drain(const std::function<void(std::size_t)>& fn);

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    std::mutex submit_mutex_;

    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t job_size_ = 0;
    std::size_t next_index_ = 0;
    std::size_t active_ = 0;
    std::size_t generation_ = 0;
    std::exception_ptr error_;
    bool stop_ = false;
};

/// Worker count from an explicit request, else the AMR_WORKERS environment
/// variable, else 1. Throws InputError on a malformed or zero value.
std::size_t resolve_worker_count(std::size_t requested = 0);

}  // namespace amr
