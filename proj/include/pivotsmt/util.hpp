#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace pivotsmt {

// A tokenized sentence; also used for phrases.
using Sentence = std::vector<std::string>;
using Phrase = std::vector<std::string>;

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

// Splits on runs of ASCII spaces/tabs; never yields empty tokens.
std::vector<std::string> split_ws(std::string_view text);

// Splits on an exact separator; keeps empty fields.
std::vector<std::string> split_on(std::string_view text, std::string_view sep);

std::string_view trim(std::string_view text);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string> read_lines(const std::filesystem::path& path);
std::vector<Sentence> read_sentences(const std::filesystem::path& path);

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
void write_sentences(const std::filesystem::path& path, const std::vector<Sentence>& sentences);

// Worker count from --jobs or PIVOTSMT_JOBS; always >= 1.
std::size_t default_jobs();

/// Evaluates fn(i) for i in [0, n) on up to `jobs` threads. Results land in
/// index order so the output does not depend on the worker count. The first
/// exception (lowest index) is rethrown after all workers finish.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t jobs, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  auto body = [&](std::size_t worker) {
    for (std::size_t i = worker; i < n; i += workers) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(body, w);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace pivotsmt
