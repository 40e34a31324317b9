//------------------------------------------------------------------------------
//
//   Copyright 2026 The finemotion Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "finemotion/error.hpp"
#include "finemotion/text.hpp"
#include "finemotion/train.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace finemotion::train {

std::size_t worker_count()
{
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (char const *env = std::getenv("FINEMOTION_THREADS"); env != nullptr && *env != '\0')
  {
    std::size_t const cap = parse_size(env, "FINEMOTION_THREADS");
    if (cap == 0)
    {
      throw Error("config", "FINEMOTION_THREADS must be at least 1");
    }
    n = std::min(n, cap);
  }
  return n;
}

void run_jobs(std::size_t n, std::function<void(std::size_t)> const &job, std::size_t threads)
{
  std::size_t const workers = std::min(n, threads == 0 ? worker_count() : threads);
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      job(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr       failure;
  std::mutex               failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
  {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++)
      {
        try
        {
          job(i);
        }
        catch (...)
        {
          std::lock_guard lock(failure_mutex);
          if (!failure)
          {
            failure = std::current_exception();
          }
          next = n;  // stop handing out work
        }
      }
    });
  }
  for (auto &t : pool)
  {
    t.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
}

}  // namespace finemotion::train
