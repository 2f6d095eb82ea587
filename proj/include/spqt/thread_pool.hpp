#pragma once

// Persistent worker pool with a static-chunked parallel_for. The calling
// thread participates as worker 0, so a pool of size 1 runs everything
// inline. Not reentrant: parallel_for must not be called from inside a body.

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spqt {

class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    count_ = threads;
    workers_.reserve(count_ > 0 ? count_ - 1 : 0);
    for (unsigned w = 1; w < count_; ++w) {
      workers_.emplace_back([this, w] { worker_loop(w); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::scoped_lock lk(mu_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  unsigned size() const noexcept { return count_; }

  // body(i) is invoked exactly once for each i in [0, n); iteration i is run
  // by the worker owning the contiguous chunk that contains i.
  template <typename F>
  void parallel_for(std::size_t n, F&& body) {
    if (n == 0) return;
    const auto parts = static_cast<unsigned>(std::min<std::size_t>(count_, n));
    if (parts <= 1) {
      for (std::size_t i = 0; i < n; ++i) body(i);
      return;
    }
    auto run_chunk = [&](unsigned part) {
      const std::size_t lo = n * part / parts;
      const std::size_t hi = n * (part + 1) / parts;
      for (std::size_t i = lo; i < hi; ++i) body(i);
    };
    std::function<void(unsigned)> job = run_chunk;
    {
      std::scoped_lock lk(mu_);
      job_ = &job;
      parts_ = parts;
      pending_ = parts - 1;
      error_ = nullptr;
      ++generation_;
    }
    cv_.notify_all();
    try {
      run_chunk(0);
    } catch (...) {
      std::scoped_lock lk(mu_);
      if (!error_) error_ = std::current_exception();
    }
    {
      std::unique_lock lk(mu_);
      done_cv_.wait(lk, [&] { return pending_ == 0; });
      if (error_) {
        auto err = error_;
        error_ = nullptr;
        std::rethrow_exception(err);
      }
    }
  }

 private:
  void worker_loop(unsigned w) {
    std::uint64_t seen = 0;
    for (;;) {
      std::function<void(unsigned)>* job = nullptr;
      unsigned parts = 0;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        parts = parts_;
        job = job_;
      }
      if (w < parts) {
        try {
          (*job)(w);
        } catch (...) {
          std::scoped_lock lk(mu_);
          if (!error_) error_ = std::current_exception();
        }
        std::scoped_lock lk(mu_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  unsigned count_ = 1;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::function<void(unsigned)>* job_ = nullptr;
  unsigned parts_ = 0;
  unsigned pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace spqt
