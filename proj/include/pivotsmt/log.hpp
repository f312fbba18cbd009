#pragma once

#include <string>
#include <vector>

namespace pivotsmt::log {

// Warnings go to stderr unless a Capture is active on the calling thread.
void warn(const std::string& message);

// Collects warnings emitted on this thread while in scope.
class Capture {
 public:
  Capture();
  ~Capture();
  Capture(const Capture&) = delete;
  Capture& operator=(const Capture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  friend void warn(const std::string& message);

  std::vector<std::string> messages_;
  Capture* previous_;
};

}  // namespace pivotsmt::log
