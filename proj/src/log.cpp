#include "pivotsmt/log.hpp"

#include <iostream>
#include <mutex>

namespace pivotsmt::log {
namespace {

thread_local Capture* active_capture = nullptr;
std::mutex stderr_mutex;

}  // namespace

Capture::Capture() : previous_(active_capture) { active_capture = this; }

Capture::~Capture() { active_capture = previous_; }

void warn(const std::string& message) {
  if (active_capture != nullptr) {
    active_capture->messages_.push_back(message);
    return;
  }
  std::lock_guard<std::mutex> lock(stderr_mutex);
  std::cerr << "warning: " << message << '\n';
}

}  // namespace pivotsmt::log
