#pragma once

// Static load-balanced execution of the independent T-table rows on a pool
// of persistent workers.

#include <parex/errors.hpp>

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

namespace parex {

/// Rows (0-based) assigned to each worker, in execution order.
struct StaticSchedule {
    std::size_t num_workers = 1;
    std::vector<std::vector<std::size_t>> assignment;
    std::vector<long> work_units;  // sum of n_j per worker

    [[nodiscard]] long spread() const {
        if (work_units.empty()) return 0;
        auto [lo, hi] = std::minmax_element(work_units.begin(), work_units.end());
        return *hi - *lo;
    }
};

namespace detail {

inline bool is_arithmetic(std::span<const int> n, std::size_t k) {
    for (std::size_t j = 0; j < k; ++j)
        if (n[j] != static_cast<int>(j + 1) * n[0]) return false;
    return true;
}

}  // namespace detail

/// Harmonic (arithmetic) sequences pair row j with row k-1-j so every pair
/// costs the same, then fold the ceil(k/2) pairs round-robin onto
/// min(num_workers, ceil(k/2)) workers. Other sequences are dealt
/// round-robin row by row.
inline StaticSchedule build_schedule(std::span<const int> n, std::size_t k, std::size_t num_workers) {
    if (k == 0 || num_workers == 0) throw ConfigError("build_schedule: k and num_workers must be positive");
    if (n.size() < k) throw ConfigError("build_schedule: sequence shorter than k");

    StaticSchedule s;
    std::vector<std::vector<std::size_t>> slots;
    if (detail::is_arithmetic(n, k)) {
        for (std::size_t j = 0; j < (k + 1) / 2; ++j) {
            if (j == k - 1 - j)
                slots.push_back({j});
            else
                slots.push_back({j, k - 1 - j});
        }
    } else {
        for (std::size_t j = 0; j < k; ++j) slots.push_back({j});
    }

    s.num_workers = std::min(num_workers, slots.size());
    s.assignment.assign(s.num_workers, {});
    s.work_units.assign(s.num_workers, 0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto& mine = s.assignment[i % s.num_workers];
        for (std::size_t j : slots[i]) {
            mine.push_back(j);
            s.work_units[i % s.num_workers] += n[j];
        }
    }
    return s;
}

/// Fixed set of long-lived workers. The calling thread acts as worker 0;
/// size() - 1 background threads are started once and reused by every run().
/// Idle workers spin briefly on the generation counter and then park on it.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t num_workers) : WorkerPool(num_workers, default_spin(num_workers)) {}

    WorkerPool(std::size_t num_workers, std::size_t spin_iterations)
        : size_(num_workers == 0 ? 1 : num_workers), spin_(spin_iterations) {
        threads_.reserve(size_ - 1);
        for (std::size_t w = 1; w < size_; ++w) {
            threads_.emplace_back([this, w] { worker_loop(w); });
            threads_started_.fetch_add(1, std::memory_order_relaxed);
        }
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        stop_.store(true, std::memory_order_relaxed);
        generation_.fetch_add(1, std::memory_order_release);
        generation_.notify_all();
        for (auto& t : threads_) t.join();
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t threads_started() const noexcept { return threads_started_.load(); }
    [[nodiscard]] std::size_t dispatches() const noexcept { return dispatches_; }

    /// Runs job(worker_index) once on every worker and returns when all have
    /// finished. The first exception thrown by any worker is rethrown.
    template <class Job>
    void run(Job&& job) {
        using J = std::remove_reference_t<Job>;
        ++dispatches_;
        if (size_ == 1) {
            job(std::size_t{0});
            return;
        }
        ctx_ = const_cast<void*>(static_cast<const void*>(&job));
        invoke_ = [](void* c, std::size_t w) { (*static_cast<J*>(c))(w); };
        error_ = nullptr;
        pending_.store(size_ - 1, std::memory_order_relaxed);
        generation_.fetch_add(1, std::memory_order_release);
        generation_.notify_all();

        execute(0);

        for (std::size_t i = 0; i < spin_; ++i) {
            if (pending_.load(std::memory_order_acquire) == 0) break;
            spin_pause();
        }
        for (std::size_t left; (left = pending_.load(std::memory_order_acquire)) != 0;) pending_.wait(left);
        if (error_) std::rethrow_exception(error_);
    }

    /// Spin count used when none is given: zero when workers outnumber hardware threads.
    static std::size_t default_spin(std::size_t workers) {
        return std::thread::hardware_concurrency() >= workers ? 200000 : 0;
    }

private:
    static void spin_pause() {
#if defined(__x86_64__) || defined(__i386__)
        __builtin_ia32_pause();
#else
        std::this_thread::yield();
#endif
    }

    void execute(std::size_t w) {
        try {
            invoke_(ctx_, w);
        } catch (...) {
            std::lock_guard lock(error_mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }

    void worker_loop(std::size_t w) {
        std::uint64_t seen = 0;
        for (;;) {
            std::uint64_t g = generation_.load(std::memory_order_acquire);
            for (std::size_t i = 0; g == seen && i < spin_; ++i) {
                spin_pause();
                g = generation_.load(std::memory_order_acquire);
            }
            while (g == seen) {
                generation_.wait(seen, std::memory_order_acquire);
                g = generation_.load(std::memory_order_acquire);
            }
            seen = g;
            if (stop_.load(std::memory_order_relaxed)) return;
            execute(w);
            if (pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) pending_.notify_all();
        }
    }

    std::size_t size_;
    std::size_t spin_;
    std::vector<std::thread> threads_;
    std::atomic<std::size_t> threads_started_{0};
    std::size_t dispatches_ = 0;

    std::atomic<std::uint64_t> generation_{0};
    std::atomic<std::size_t> pending_{0};
    std::atomic<bool> stop_{false};
    void* ctx_ = nullptr;
    void (*invoke_)(void*, std::size_t) = nullptr;
    std::mutex error_mutex_;
    std::exception_ptr error_;
};

/// Evaluates row_task(j) for every row of the schedule. With a null pool (or
/// a one-worker schedule) the rows run serially in index order. Results are
/// indexed by row; if any rows throw, the error of the lowest row index is
/// rethrown after all rows have run.
template <class Result, class Task>
std::vector<Result> run_rows(WorkerPool* pool, const StaticSchedule& schedule, Task&& row_task) {
    std::size_t k = 0;
    for (const auto& rows : schedule.assignment) k += rows.size();
    std::vector<Result> results(k);
    std::vector<std::exception_ptr> errors(k);

    auto run_one = [&](std::size_t j) {
        try {
            results[j] = row_task(j);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };

    if (pool == nullptr || pool->size() == 1 || schedule.num_workers == 1) {
        for (std::size_t j = 0; j < k; ++j) run_one(j);
    } else {
        pool->run([&](std::size_t w) {
            if (w >= schedule.assignment.size()) return;
            for (std::size_t j : schedule.assignment[w]) run_one(j);
        });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace parex
