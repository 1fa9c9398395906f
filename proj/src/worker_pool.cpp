#include "amr/worker_pool.hpp"

#include "amr/error.hpp"

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>

namespace amr {

namespace {
thread_local bool inside_pool_task = false;
}

WorkerPool::WorkerPool(std::size_t workers) {
    if (workers == 0) workers = 1;
    threads_.reserve(workers - 1);
    for (std::size_t i = 1; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
}

WorkerPool& WorkerPool::serial() {
    static WorkerPool pool(1);
    return pool;
}

void WorkerPool::drain(const std::function<void(std::size_t)>& fn) {
    for (;;) {
        std::size_t i;
        {
            std::lock_guard lock(mutex_);
            if (next_index_ >= job_size_ || error_) return;
            i = next_index_++;
        }
        try {
            fn(i);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }
}

void WorkerPool::worker_loop() {
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(std::size_t)>* job;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            job = job_;
            if (job == nullptr) continue;  // woke after the loop already finished
            ++active_;
        }
        inside_pool_task = true;
        drain(*job);
        inside_pool_task = false;
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        done_.notify_all();
    }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (threads_.empty() || n == 1 || inside_pool_task) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    // One loop at a time per pool; concurrent submitters queue here.
    std::lock_guard submit(submit_mutex_);
    {
        std::lock_guard lock(mutex_);
        job_ = &fn;
        job_size_ = n;
        next_index_ = 0;
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();

    inside_pool_task = true;
    drain(fn);
    inside_pool_task = false;

    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return active_ == 0 && (next_index_ >= job_size_ || error_); });
        job_ = nullptr;
        job_size_ = 0;
        error = std::exchange(error_, nullptr);
    }
    if (error) std::rethrow_exception(error);
}

std::size_t resolve_worker_count(std::size_t requested) {
    if (requested > 0) return requested;
    const char* env = std::getenv("AMR_WORKERS");
    if (env == nullptr || *env == '\0') return 1;
    const std::string_view text(env);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc{} || ptr != text.data() + text.size() || n == 0)
        throw InputError("AMR_WORKERS must be a positive integer, got '" + std::string(text) + "'");
    return n;
}

}  // namespace amr
