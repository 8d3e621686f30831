#pragma once

#include <atomic>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace fraclab {

// Violated input contract (bad order, malformed grid, out-of-range radius, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iteration or fit that did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

namespace detail {
inline std::mutex& warn_mutex() {
  static std::mutex m;
  return m;
}
inline std::function<void(const std::string&)>& warn_sink() {
  static std::function<void(const std::string&)> sink = [](const std::string& msg) {
    std::cerr << "fraclab: warning: " << msg << '\n';
  };
  return sink;
}
}  // namespace detail

// Non-fatal diagnostics go through a replaceable sink (stderr by default).
inline void set_warning_sink(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(detail::warn_mutex());
  detail::warn_sink() = std::move(sink);
}

inline void warn(const std::string& msg) {
  std::lock_guard lock(detail::warn_mutex());
  if (detail::warn_sink()) detail::warn_sink()(msg);
}

}  // namespace fraclab
