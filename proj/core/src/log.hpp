#pragma once

#include <iostream>
#include <mutex>
#include <string_view>

namespace rsmooth::detail {

inline void warn(std::string_view message) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "rsmooth: warning: " << message << '\n';
}

}  // namespace rsmooth::detail
