//------------------------------------------------------------------------------
//
//   Copyright 2026 The SFL Authors
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

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sfl {

using Vector = std::vector<double>;

// Error hierarchy. Every failure surfaced by the library is one of these.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class ParameterError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

class EmptyDatasetError : public Error
{
public:
  using Error::Error;
};

/// A request whose work exceeds a configured budget (grid cells, search dimensions).
class BudgetError : public Error
{
public:
  using Error::Error;
};

namespace detail {

template <typename... Args>
std::string concat(Args &&...args)
{
  std::ostringstream oss;
  (oss << ... << std::forward<Args>(args));
  return oss.str();
}

inline std::function<void(std::string_view)> &warning_sink()
{
  static std::function<void(std::string_view)> sink = [](std::string_view msg) {
    // Print each distinct message once per process; sweeps would repeat them per sample.
    static std::mutex      mutex;
    static std::set<std::string> seen;
    std::lock_guard<std::mutex> lock(mutex);
    if (seen.emplace(msg).second)
    {
      std::cerr << "warning: " << msg << '\n';
    }
  };
  return sink;
}

}  // namespace detail

/// Replace the process-wide warning handler. Returns the previous one.
inline std::function<void(std::string_view)> set_warning_sink(
    std::function<void(std::string_view)> sink)
{
  auto previous = std::move(detail::warning_sink());
  detail::warning_sink() = std::move(sink);
  return previous;
}

inline void warn(std::string_view message)
{
  if (detail::warning_sink())
  {
    detail::warning_sink()(message);
  }
}

template <typename... Args>
[[noreturn]] void fail_parameter(Args &&...args)
{
  throw ParameterError(detail::concat(std::forward<Args>(args)...));
}

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double value)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline bool all_finite(const Vector &v)
{
  for (double x : v)
  {
    if (!std::isfinite(x))
    {
      return false;
    }
  }
  return true;
}

}  // namespace sfl
