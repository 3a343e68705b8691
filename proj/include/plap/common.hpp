#pragma once

#include <stdexcept>
#include <string>

namespace plap {

// Precondition check used throughout the library. Violations are caller
// errors, so they surface as std::invalid_argument.
inline void ensure(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace plap
